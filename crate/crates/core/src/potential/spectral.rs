//! Free-space convolution on the box by a truncated-kernel spectral method.
//!
//! The kernel is cut off at radius `T` between the box diagonal `2√3 L` and
//! `4L`, and the source is zero-padded threefold per axis. Then every box
//! separation lies inside the cutoff and no periodic image reaches it, so the
//! periodic convolution with the exact Fourier transform of the truncated
//! kernel reproduces the free-space potential to spectral accuracy, with no
//! neutralizing background.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::grid::{freq_index, BoxGrid, Fft3};

/// Padding factor per axis.
pub const PADDING: usize = 3;

pub struct Padded {
    pub n: usize,
    pub np: usize,
    pub h: f64,
    pub fft: Fft3,
}

impl Padded {
    pub fn new(grid: &BoxGrid) -> Self {
        let n = grid.n_per_axis();
        let np = PADDING * n;
        Padded { n, np, h: grid.spacing(), fft: Fft3::new(np) }
    }

    pub fn cutoff(&self) -> f64 {
        let l = self.n as f64 * self.h / 2.0;
        0.5 * (2.0 * 3f64.sqrt() * l + 4.0 * l)
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / (self.np as f64 * self.h)
    }

    pub fn len(&self) -> usize {
        self.np * self.np * self.np
    }

    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.np + j) * self.np + k
    }

    /// Integer `|m|²` of each padded Fourier bin.
    pub fn for_each_bin(&self, mut f: impl FnMut(usize, [i64; 3], u64)) {
        let np = self.np;
        for i in 0..np {
            let mi = freq_index(i, np);
            for j in 0..np {
                let mj = freq_index(j, np);
                for k in 0..np {
                    let mk = freq_index(k, np);
                    let m2 = (mi * mi + mj * mj + mk * mk) as u64;
                    f(self.idx(i, j, k), [mi, mj, mk], m2);
                }
            }
        }
    }

    pub fn max_m2(&self) -> usize {
        3 * (self.np / 2).pow(2)
    }

    /// Zero-padded spectrum of box samples.
    pub fn transform(&self, rho: &[f64]) -> Vec<Complex64> {
        let n = self.n;
        let mut data = vec![Complex64::new(0.0, 0.0); self.len()];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    data[self.idx(i, j, k)] = Complex64::new(rho[(i * n + j) * n + k], 0.0);
                }
            }
        }
        self.fft.forward(&mut data);
        data
    }

    /// Table of `f(|k|)` indexed by integer `|m|²`.
    pub fn radial_table(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let dk = self.dk();
        (0..=self.max_m2()).map(|m2| f(dk * (m2 as f64).sqrt())).collect()
    }
}

/// Fourier transform of `K_a` truncated at radius `t`.
pub fn truncated_kernel_hat(k: f64, a: f64, t: f64) -> f64 {
    let al = 1.0 / a;
    let et = (-t * al).exp();
    if k == 0.0 {
        return 4.0 * PI * (t * t / 2.0 - a * a + a * et * (t + a));
    }
    let (s, c) = (k * t).sin_cos();
    let one_minus_cos = 2.0 * (0.5 * k * t).sin().powi(2);
    let exp_part = (k - et * (al * s + k * c)) / (al * al + k * k);
    4.0 * PI / k * (one_minus_cos / k - exp_part)
}

/// Fourier transform of `e^{-|x|/a}` truncated at radius `t`.
pub fn truncated_exponential_hat(k: f64, a: f64, t: f64) -> f64 {
    let al = 1.0 / a;
    let et = (-t * al).exp();
    if k == 0.0 {
        let a3 = a * a * a;
        return 4.0 * PI * (2.0 * a3 - et * (t * t * a + 2.0 * t * a * a + 2.0 * a3));
    }
    let (s, c) = (k * t).sin_cos();
    let num = k - et * (al * s + k * c);
    let dnum = et * (t * (al * s + k * c) - s);
    let den = al * al + k * k;
    4.0 * PI / k * (2.0 * al * num - dnum * den) / (den * den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, Tolerance};

    #[test]
    fn transforms_match_radial_quadrature() {
        let (a, t) = (0.7, 9.0);
        let tol = Tolerance { abs: 1e-14, rel: 1e-12, max_intervals: 5000 };
        for &k in &[0.0, 1e-3, 0.5, 2.0, 7.3] {
            let sinc = |r: f64| if k == 0.0 { r } else { (k * r).sin() / k };
            let kk = integrate(|r| 4.0 * PI * sinc(r) * (-(-r / a).exp_m1()), 0.0, t, tol).unwrap().value;
            let xx = integrate(|r| 4.0 * PI * r * sinc(r) * (-r / a).exp(), 0.0, t, tol).unwrap().value;
            assert!((truncated_kernel_hat(k, a, t) - kk).abs() < 1e-9 * kk.abs().max(1.0), "k={k}");
            assert!((truncated_exponential_hat(k, a, t) - xx).abs() < 1e-9 * xx.abs().max(1.0), "k={k}");
        }
    }
}
