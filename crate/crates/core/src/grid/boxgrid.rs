//! Periodic cubic box with spectral differentiation.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft3::{freq_index, Fft3};
use super::interp::MonotoneCubic;
use super::{Grid, GridSpec};
use crate::{Error, Result};

/// Nodes `x = -L + i h` per axis, `h = 2L/n`, stored row-major in `(x, y, z)`.
#[derive(Debug)]
pub struct BoxGrid {
    n: usize,
    half_width: f64,
    h: f64,
    weights: Vec<f64>,
    ksq: Vec<f64>,
    fft: Fft3,
}

impl BoxGrid {
    pub fn new(n_per_axis: usize, half_width: f64) -> Result<Self> {
        if n_per_axis < 4 || n_per_axis % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "box needs an even n_per_axis ≥ 4, got {n_per_axis}"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "box half-width must be positive, got {half_width}"
            )));
        }
        let n = n_per_axis;
        let h = 2.0 * half_width / n as f64;
        let dk = 2.0 * PI / (2.0 * half_width);
        let mut ksq = Vec::with_capacity(n * n * n);
        for i in 0..n {
            let kx = freq_index(i, n) as f64 * dk;
            for j in 0..n {
                let ky = freq_index(j, n) as f64 * dk;
                for k in 0..n {
                    let kz = freq_index(k, n) as f64 * dk;
                    ksq.push(kx * kx + ky * ky + kz * kz);
                }
            }
        }
        Ok(BoxGrid {
            n,
            half_width,
            h,
            weights: vec![h * h * h; n * n * n],
            ksq,
            fft: Fft3::new(n),
        })
    }

    pub fn n_per_axis(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        c.map(|i| -self.half_width + i as f64 * self.h)
    }

    /// `|k|²` per Fourier bin in FFT order.
    pub fn wavenumbers_sq(&self) -> &[f64] {
        &self.ksq
    }

    pub fn fft(&self) -> &Fft3 {
        &self.fft
    }

    fn spectral_multiply(&self, u: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut data: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut data);
        for (c, &k2) in data.iter_mut().zip(&self.ksq) {
            *c *= symbol(k2);
        }
        self.fft.inverse(&mut data);
        let norm = 1.0 / data.len() as f64;
        data.iter().map(|c| c.re * norm).collect()
    }

    /// Shifts `u` by whole cells so that `|u|` peaks at the box center;
    /// cells shifted in from outside are zero.
    pub fn recenter(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n as i64;
        let peak = u
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) })
            .0;
        let c = self.coords(peak);
        let shift = c.map(|x| n / 2 - x as i64);
        let mut out = vec![0.0; u.len()];
        for (idx, &v) in u.iter().enumerate() {
            let c = self.coords(idx);
            let t = [c[0] as i64 + shift[0], c[1] as i64 + shift[1], c[2] as i64 + shift[2]];
            if t.iter().all(|&x| (0..n).contains(&x)) {
                out[self.index(t[0] as usize, t[1] as usize, t[2] as usize)] = v;
            }
        }
        out
    }
}

impl Grid for BoxGrid {
    fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn radius(&self, i: usize) -> f64 {
        self.point(i).iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    fn outer_radius(&self) -> f64 {
        self.half_width
    }

    fn dirichlet_form(&self, u: &[f64]) -> f64 {
        let au = self.dirichlet_apply(u);
        au.iter().zip(u).map(|(a, b)| a * b).sum()
    }

    fn dirichlet_apply(&self, u: &[f64]) -> Vec<f64> {
        let w = self.h.powi(3);
        self.spectral_multiply(u, |k2| w * k2)
    }

    fn pinned(&self) -> &[usize] {
        &[]
    }

    fn sobolev_solve_with_mass(&self, rhs: &[f64], mu: f64) -> Result<Vec<f64>> {
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!("periodic metric mass must be > 0, got {mu}")));
        }
        let w = self.h.powi(3);
        Ok(self.spectral_multiply(rhs, |k2| 1.0 / (w * (mu + k2))))
    }

    fn dilate(&self, u: &[f64], t: f64) -> Vec<f64> {
        let n = self.n;
        let (x0, h) = (-self.half_width, self.h);
        let mut cur = u.to_vec();
        let mut line = vec![0.0; n];
        for axis in 0..3 {
            let stride = match axis {
                0 => n * n,
                1 => n,
                _ => 1,
            };
            let mut next = vec![0.0; cur.len()];
            for base in 0..cur.len() {
                if (base / stride) % n != 0 {
                    continue;
                }
                for (m, l) in line.iter_mut().enumerate() {
                    *l = cur[base + m * stride];
                }
                let f = MonotoneCubic::new(x0, h, line.clone());
                for m in 0..n {
                    next[base + m * stride] = f.eval(t * (x0 + m as f64 * h));
                }
            }
            cur = next;
        }
        cur.iter().map(|v| t * t * v).collect()
    }

    fn spec(&self) -> GridSpec {
        GridSpec::Box { n_per_axis: self.n, half_width: self.half_width }
    }
}
