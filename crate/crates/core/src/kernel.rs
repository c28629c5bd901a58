//! The Bopp–Podolsky kernel `K(r) = (1 - e^{-r/a}) / r` and its pieces.
//!
//! `K` is the difference of the Coulomb potential `C(r) = 1/r` and the Yukawa
//! potential `Y(r) = e^{-r/a}/r`, and is the fundamental solution of
//! `-Δ + a²Δ²` in three dimensions (normalised to `4πδ`). All functions here
//! are pure and keep the length `a` explicit.

use serde::{Deserialize, Serialize};

use crate::ddreal::DdReal;
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Bopp–Podolsky length `a` and coupling `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub a: f64,
    pub q: f64,
}

impl KernelParams {
    pub fn new(a: f64, q: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
        }
        if q == 0.0 || !q.is_finite() {
            return Err(Error::InvalidParameter(format!("q must be nonzero, got {q}")));
        }
        Ok(KernelParams { a, q })
    }

    /// Same coupling, different length.
    pub fn with_length(self, a: f64) -> Self {
        KernelParams { a, ..self }
    }
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams { a: 1.0, q: 1.0 }
    }
}

/// All kernel quantities at one radius. `c` and `y` are infinite at `r = 0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelSample {
    pub r: f64,
    pub k: f64,
    pub c: f64,
    pub y: f64,
    pub dk: f64,
    pub lap_k: f64,
}

/// `K(r)`, continuously extended by `1/a` at the origin.
pub fn eval_k(r: f64, p: &KernelParams) -> f64 {
    debug_assert!(r >= 0.0);
    if r == 0.0 {
        return 1.0 / p.a;
    }
    -(-r / p.a).exp_m1() / r
}

/// Coulomb potential `1/r`.
pub fn eval_c(r: f64) -> Result<f64> {
    if r > 0.0 {
        Ok(1.0 / r)
    } else {
        Err(Error::Domain(format!("Coulomb potential has a pole at r = {r}")))
    }
}

/// Yukawa potential `e^{-r/a}/r`.
pub fn eval_y(r: f64, p: &KernelParams) -> Result<f64> {
    if r > 0.0 {
        Ok((-r / p.a).exp() / r)
    } else {
        Err(Error::Domain(format!("Yukawa potential has a pole at r = {r}")))
    }
}

// e^{-x}(1 + x) - 1 without cancellation for small x.
fn damped_linear_minus_one(x: f64) -> f64 {
    if x < 0.05 {
        let mut term = x; // x^n / n! at n = 1
        let mut sum = 0.0;
        for n in 2..16 {
            term *= x / n as f64;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (1.0 - n as f64) * term;
        }
        sum
    } else {
        (-x).exp() * (1.0 + x) - 1.0
    }
}

/// Radial component of `∇K`, i.e. `(e^{-r/a}(1 + r/a) - 1) / r²`.
pub fn eval_grad_k_radial(r: f64, p: &KernelParams) -> Result<f64> {
    if r > 0.0 {
        Ok(damped_linear_minus_one(r / p.a) / (r * r))
    } else {
        Err(Error::Domain("∇K is evaluated away from the origin only".into()))
    }
}

/// `ΔK = -e^{-r/a} / (a² r)`.
pub fn eval_lap_k(r: f64, p: &KernelParams) -> Result<f64> {
    if r > 0.0 {
        Ok(-(-r / p.a).exp() / (p.a * p.a * r))
    } else {
        Err(Error::Domain("ΔK has a 1/r pole at the origin".into()))
    }
}

/// Radial component of `∇ΔK = e^{-r/a}(1 + r/a) / (a² r²)`.
pub fn eval_grad_lap_k_radial(r: f64, p: &KernelParams) -> Result<f64> {
    if r > 0.0 {
        let x = r / p.a;
        Ok((-x).exp() * (1.0 + x) / (p.a * p.a * r * r))
    } else {
        Err(Error::Domain("∇ΔK is evaluated away from the origin only".into()))
    }
}

/// Every kernel quantity at `r`; the singular ones are `+∞`/`-∞` at the origin.
pub fn sample(r: f64, p: &KernelParams) -> KernelSample {
    let k = eval_k(r, p);
    if r == 0.0 {
        return KernelSample {
            r,
            k,
            c: f64::INFINITY,
            y: f64::INFINITY,
            dk: -0.5 / (p.a * p.a),
            lap_k: f64::NEG_INFINITY,
        };
    }
    KernelSample {
        r,
        k,
        c: 1.0 / r,
        y: (-r / p.a).exp() / r,
        dk: damped_linear_minus_one(r / p.a) / (r * r),
        lap_k: -(-r / p.a).exp() / (p.a * p.a * r),
    }
}

/// `C(r) - Y(r)` evaluated in double-double arithmetic.
pub fn coulomb_minus_yukawa_dd(r: f64, p: &KernelParams) -> DdReal {
    let r = DdReal::new(r);
    let x = r / DdReal::new(p.a);
    let c = r.recip();
    let y = DdReal::exp_neg(x) / r;
    c - y
}

/// Relative defect `|K - (C - Y)| / K` with `C - Y` taken in extended precision.
pub fn identity_defect(r: f64, p: &KernelParams) -> f64 {
    let k = eval_k(r, p);
    let reference = coulomb_minus_yukawa_dd(r, p);
    ((DdReal::new(k) - reference).to_f64() / k).abs()
}

/// `(C * Y)(R) / (4π a²)` from the one-dimensional reduction of the
/// convolution in spherical coordinates: after integrating out the angles,
/// `(C * Y)(R) = (π/R) ∫₀^∞ e^{-s/a} 2[(s + R) - |s - R|] ds`.
pub fn coulomb_yukawa_convolution(big_r: f64, p: &KernelParams) -> Result<f64> {
    if !(big_r > 0.0) {
        return Err(Error::Domain(format!("convolution evaluated at R = {big_r}")));
    }
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-13,
        max_intervals: 4000,
    };
    let integrand = |s: f64| (-s / p.a).exp() * 2.0 * ((s + big_r) - (s - big_r).abs());
    let inner = quad::integrate(integrand, 0.0, big_r, tol)
        .map_err(|e| Error::Quadrature(format!("R = {big_r}: {e}")))?;
    let outer = quad::integrate_to_infinity(integrand, big_r, tol)
        .map_err(|e| Error::Quadrature(format!("R = {big_r}: {e}")))?;
    let conv = std::f64::consts::PI / big_r * (inner.value + outer.value);
    Ok(conv / (4.0 * std::f64::consts::PI * p.a * p.a))
}

/// Largest relative gap between `(C * Y)/(4πa²)` and `K` over `radii`.
pub fn verify_cy_convolution(p: &KernelParams, radii: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &r in radii {
        let conv = coulomb_yukawa_convolution(r, p)?;
        let k = eval_k(r, p);
        worst = worst.max(((conv - k) / k).abs());
    }
    Ok(worst)
}
