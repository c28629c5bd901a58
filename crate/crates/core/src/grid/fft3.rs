//! In-place three-dimensional complex FFT on row-major cubic arrays.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Unnormalized forward/inverse 3D transform for an `n × n × n` array.
#[derive(Clone)]
pub struct Fft3 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.fwd);
    }

    /// Inverse transform without the `1/n³` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inv);
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n);
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    line[j] = data[(i * n + j) * n + k];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for j in 0..n {
                    data[(i * n + j) * n + k] = line[j];
                }
            }
        }
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    line[i] = data[(i * n + j) * n + k];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for i in 0..n {
                    data[(i * n + j) * n + k] = line[i];
                }
            }
        }
    }
}

/// Signed frequency index of bin `m` for length `n`.
pub fn freq_index(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_plane_wave() {
        let n = 6;
        let fft = Fft3::new(n);
        let mut data: Vec<Complex64> = (0..n * n * n)
            .map(|idx| {
                let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
                let phase = 2.0 * std::f64::consts::PI * (i as f64 + 2.0 * j as f64 - k as f64) / n as f64;
                Complex64::new(phase.cos(), phase.sin())
            })
            .collect();
        let orig = data.clone();
        fft.forward(&mut data);
        let peak = (1 * n + 2) * n + (n - 1);
        assert!((data[peak].re - (n * n * n) as f64).abs() < 1e-9);
        let off: f64 = data.iter().enumerate().filter(|(i, _)| *i != peak).map(|(_, c)| c.norm()).sum();
        assert!(off < 1e-9);
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / (n * n * n) as f64 - b).norm() < 1e-12);
        }
    }
}
