//! Symmetric banded matrices and their Cholesky factors.

use crate::{Error, Result};

/// Symmetric matrix stored by lower diagonals: `band[d][i] = A[i][i - d]`.
#[derive(Debug, Clone)]
pub struct SymBanded {
    n: usize,
    band: Vec<Vec<f64>>,
}

impl SymBanded {
    pub fn zeros(n: usize, half_bandwidth: usize) -> Self {
        SymBanded { n, band: vec![vec![0.0; n]; half_bandwidth + 1] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.band.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        if d > self.half_bandwidth() {
            0.0
        } else {
            self.band[d][i]
        }
    }

    /// Adds `v` to `A[i][j]` (and, by symmetry, `A[j][i]`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        assert!(d <= self.half_bandwidth(), "entry outside band");
        self.band[d][i] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            y[i] += self.band[0][i] * x[i];
            for d in 1..=self.half_bandwidth().min(i) {
                let a = self.band[d][i];
                y[i] += a * x[i - d];
                y[i - d] += a * x[i];
            }
        }
        y
    }

    /// Leading principal block of size `m`.
    pub fn leading(&self, m: usize) -> SymBanded {
        assert!(m <= self.n);
        SymBanded { n: m, band: self.band.iter().map(|b| b[..m].to_vec()).collect() }
    }

    pub fn add_diagonal(&mut self, diag: &[f64]) {
        for (a, d) in self.band[0].iter_mut().zip(diag) {
            *a += d;
        }
    }

    pub fn cholesky(&self) -> Result<BandedCholesky> {
        let p = self.half_bandwidth();
        let n = self.n;
        let mut l = self.band.clone();
        for i in 0..n {
            for d in (1..=p.min(i)).rev() {
                let j = i - d;
                let mut s = l[d][i];
                for e in 1..=p.min(j) {
                    let k = j - e;
                    if i - k <= p {
                        s -= l[i - k][i] * l[e][j];
                    }
                }
                l[d][i] = s / l[0][j];
            }
            let mut s = l[0][i];
            for d in 1..=p.min(i) {
                s -= l[d][i] * l[d][i];
            }
            if !(s > 0.0) {
                return Err(Error::LinearSolve(format!(
                    "matrix not positive definite at row {i} (pivot {s:e})"
                )));
            }
            l[0][i] = s.sqrt();
        }
        Ok(BandedCholesky { n, l })
    }
}

/// Lower-triangular banded factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    l: Vec<Vec<f64>>,
}

impl BandedCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let p = self.l.len() - 1;
        let mut y = b.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for d in 1..=p.min(i) {
                s -= self.l[d][i] * y[i - d];
            }
            y[i] = s / self.l[0][i];
        }
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for d in 1..=p.min(self.n - 1 - i) {
                s -= self.l[d][i + d] * y[i + d];
            }
            y[i] = s / self.l[0][i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_pentadiagonal_system() {
        let n = 12;
        let mut a = SymBanded::zeros(n, 2);
        for i in 0..n {
            a.add(i, i, 6.0 + i as f64 * 0.1);
            if i >= 1 {
                a.add(i, i - 1, -1.5);
            }
            if i >= 2 {
                a.add(i, i - 2, 0.25);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x);
        let sol = a.cholesky().unwrap().solve(&b);
        for (s, t) in sol.iter().zip(&x) {
            assert!((s - t).abs() < 1e-13);
        }
        assert_eq!(a.get(3, 5), a.get(5, 3));
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = SymBanded::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(1, 0, 2.0);
        assert!(a.cholesky().is_err());
    }
}
