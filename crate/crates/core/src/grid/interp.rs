//! Monotone piecewise-cubic Hermite interpolation on uniform nodes.

/// Cubic Hermite interpolant through `y[k]` at `x0 + k h`, with slopes from
/// fourth-order differences limited so that monotone data stays monotone.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x0: f64, h: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        assert!(n >= 2, "need at least two nodes");
        let mut d = vec![0.0; n];
        for k in 0..n {
            d[k] = if k >= 2 && k + 2 < n {
                (-y[k + 2] + 8.0 * y[k + 1] - 8.0 * y[k - 1] + y[k - 2]) / (12.0 * h)
            } else if k >= 1 && k + 1 < n {
                (y[k + 1] - y[k - 1]) / (2.0 * h)
            } else if k == 0 {
                (y[1] - y[0]) / h
            } else {
                (y[k] - y[k - 1]) / h
            };
        }
        for k in 1..n - 1 {
            let left = (y[k] - y[k - 1]) / h;
            let right = (y[k + 1] - y[k]) / h;
            if left * right <= 0.0 {
                d[k] = 0.0;
            } else {
                let sign = left.signum();
                let cap = 3.0 * left.abs().min(right.abs());
                d[k] = sign * (sign * d[k]).clamp(0.0, cap);
            }
        }
        MonotoneCubic { x0, h, y, d }
    }

    /// Value at `x`; zero outside the node range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let s = (x - self.x0) / self.h;
        if !(s >= 0.0) || s > (n - 1) as f64 {
            return 0.0;
        }
        let k = (s.floor() as usize).min(n - 2);
        let t = s - k as f64;
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        let (d0, d1) = (self.d[k] * self.h, self.d[k + 1] * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1
    }
}
