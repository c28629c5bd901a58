//! Radial grid on a smooth stretched coordinate, with a fourth-order
//! staggered Dirichlet form.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use super::banded::{BandedCholesky, SymBanded};
use super::interp::MonotoneCubic;
use super::{Grid, GridSpec};
use crate::{Error, Result};

/// Nodes `r_i = r(ξ_i)` on the uniform coordinate `ξ_i = (i+1)/n`, with
/// `r(ξ) = R sinh(βξ)/sinh β` (`r(ξ) = Rξ` for `β = 0`). The map is odd, so
/// radial fields stay even in `ξ`, and the last node sits at `R_max`.
/// Larger `β` concentrates nodes near the origin; the spacing grows
/// geometrically outwards.
///
/// Weights are the trapezoid rule in `ξ` for `∫ f 4πr² dr` with sixth-order
/// Gregory corrections at the outer end. Integrands of radial fields are
/// even in `ξ`, so the trapezoid rule is spectrally accurate at the origin.
///
/// The Dirichlet form is written through `v = r u`:
/// `∫|u'|² r² dr = ∫ v_ξ²/r'(ξ) dξ − R u(R)²`, with `v_ξ` sampled at
/// midpoints by a fourth-order staggered difference. Odd reflection
/// `v(−ξ) = −v(ξ)` closes the stencil at the origin and a cubic ghost node
/// closes it at `R_max`.
#[derive(Debug)]
pub struct RadialGrid {
    n: usize,
    r_max: f64,
    cluster: f64,
    dxi: f64,
    r: Vec<f64>,
    dr: Vec<f64>,
    weights: Vec<f64>,
    dirichlet: SymBanded,
    pinned: [usize; 1],
    sobolev: Mutex<Vec<(u64, Arc<BandedCholesky>)>>,
}

/// Outer-end corrections to the trapezoid weights, endpoint first.
const GREGORY_END: [f64; 6] = [
    19087.0 / 60480.0,
    84199.0 / 60480.0,
    18869.0 / 30240.0,
    37621.0 / 30240.0,
    55031.0 / 60480.0,
    61343.0 / 60480.0,
];

impl RadialGrid {
    /// Uniform grid, `β = 0`.
    pub fn new(n: usize, r_max: f64) -> Result<Self> {
        Self::stretched(n, r_max, 0.0)
    }

    pub fn stretched(n: usize, r_max: f64, cluster: f64) -> Result<Self> {
        if n < 16 {
            return Err(Error::InvalidParameter(format!("radial grid needs n ≥ 16, got {n}")));
        }
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::InvalidParameter(format!("R_max must be positive, got {r_max}")));
        }
        if !(0.0..=20.0).contains(&cluster) {
            return Err(Error::InvalidParameter(format!("cluster must lie in [0, 20], got {cluster}")));
        }
        let dxi = 1.0 / n as f64;
        let xi = |i: i64| i as f64 * dxi;
        let map = |x: f64| stretch(x, r_max, cluster);
        let r: Vec<f64> = (1..=n as i64).map(|i| map(xi(i)).0).collect();
        let dr: Vec<f64> = (1..=n as i64).map(|i| map(xi(i)).1).collect();
        let mut weights: Vec<f64> = r.iter().zip(&dr).map(|(&ri, &di)| 4.0 * PI * ri * ri * di * dxi).collect();
        for (k, c) in GREGORY_END.iter().enumerate() {
            weights[n - 1 - k] *= c;
        }
        // r'(ξ) at the midpoints ξ_{m+1/2}, m = 0..n-1
        let dr_mid: Vec<f64> = (0..n).map(|m| map((m as f64 + 0.5) * dxi).1).collect();
        let dirichlet = build_dirichlet(&r, &dr_mid, dxi);
        Ok(RadialGrid {
            n,
            r_max,
            cluster,
            dxi,
            r,
            dr,
            weights,
            dirichlet,
            pinned: [n - 1],
            sobolev: Mutex::new(Vec::new()),
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    /// `r'(ξ_i)`.
    pub fn stretch_factors(&self) -> &[f64] {
        &self.dr
    }

    /// Step of the uniform coordinate, `1/n`.
    pub fn xi_step(&self) -> f64 {
        self.dxi
    }

    /// Local node spacing `r'(ξ_i)/n`.
    pub fn local_spacing(&self, i: usize) -> f64 {
        self.dr[i] * self.dxi
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn cluster(&self) -> f64 {
        self.cluster
    }

    /// `ξ` with `r(ξ) = r`.
    pub fn xi_of(&self, r: f64) -> f64 {
        if self.cluster == 0.0 {
            r / self.r_max
        } else {
            (r * self.cluster.sinh() / self.r_max).asinh() / self.cluster
        }
    }

    pub fn dirichlet_matrix(&self) -> &SymBanded {
        &self.dirichlet
    }

    /// Monotone cubic interpolant of `u` in `ξ`, even about the origin and
    /// zero beyond `R_max`.
    pub fn interpolant(&self, u: &[f64]) -> MonotoneCubic {
        let n = self.n;
        let u0 = (15.0 * u[0] - 6.0 * u[1] + u[2]) / 10.0;
        let mut y = Vec::with_capacity(n + 4);
        y.extend_from_slice(&[u[2], u[1], u[0], u0]);
        y.extend_from_slice(u);
        MonotoneCubic::new(-3.0 * self.dxi, self.dxi, y)
    }

    /// Value of `u` at an arbitrary radius by the same interpolant.
    pub fn sample(&self, u: &[f64], r: f64) -> f64 {
        self.interpolant(u).eval(self.xi_of(r.abs()))
    }
}

/// `(r(ξ), r'(ξ))`.
fn stretch(xi: f64, r_max: f64, beta: f64) -> (f64, f64) {
    if beta == 0.0 {
        (r_max * xi, r_max)
    } else {
        let c = r_max / beta.sinh();
        (c * (beta * xi).sinh(), c * beta * (beta * xi).cosh())
    }
}

/// Expresses `v_k` (`k = -1..=n+1`, `v = r u`) as a combination of `u` nodes.
fn v_terms(k: i64, r: &[f64]) -> Vec<(usize, f64)> {
    let n = r.len() as i64;
    match k {
        0 => vec![],
        -1 => vec![(0, -r[0])],
        k if (1..=n).contains(&k) => vec![((k - 1) as usize, r[(k - 1) as usize])],
        k if k == n + 1 => {
            let n = n as usize;
            vec![
                (n - 1, 4.0 * r[n - 1]),
                (n - 2, -6.0 * r[n - 2]),
                (n - 3, 4.0 * r[n - 3]),
                (n - 4, -r[n - 4]),
            ]
        }
        _ => unreachable!("stencil index out of range"),
    }
}

/// Rows `D_m`, `m = 0..n-1`, of the midpoint derivative `v_ξ` in terms of `u`.
fn derivative_rows(r: &[f64], h: f64) -> Vec<Vec<(usize, f64)>> {
    let n = r.len();
    let stencil = [(-1_i64, 1.0), (0, -27.0), (1, 27.0), (2, -1.0)];
    (0..n)
        .map(|m| {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for &(off, c) in &stencil {
                for (j, a) in v_terms(m as i64 + off, r) {
                    let coef = c * a / (24.0 * h);
                    match row.iter_mut().find(|(jj, _)| *jj == j) {
                        Some(e) => e.1 += coef,
                        None => row.push((j, coef)),
                    }
                }
            }
            row
        })
        .collect()
}

fn build_dirichlet(r: &[f64], dr_mid: &[f64], h: f64) -> SymBanded {
    let n = r.len();
    let mut a = SymBanded::zeros(n, 3);
    for (row, d) in derivative_rows(r, h).iter().zip(dr_mid) {
        for &(i, ci) in row {
            for &(j, cj) in row {
                if i >= j {
                    a.add(i, j, 4.0 * PI * h * ci * cj / d);
                }
            }
        }
    }
    a.add(n - 1, n - 1, -4.0 * PI * r[n - 1]);
    a
}

impl Grid for RadialGrid {
    fn len(&self) -> usize {
        self.n
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn radius(&self, i: usize) -> f64 {
        self.r[i]
    }

    fn outer_radius(&self) -> f64 {
        self.r_max
    }

    fn dirichlet_form(&self, u: &[f64]) -> f64 {
        let au = self.dirichlet.mul_vec(u);
        au.iter().zip(u).map(|(a, b)| a * b).sum()
    }

    fn dirichlet_apply(&self, u: &[f64]) -> Vec<f64> {
        self.dirichlet.mul_vec(u)
    }

    fn pinned(&self) -> &[usize] {
        &self.pinned
    }

    fn sobolev_solve_with_mass(&self, rhs: &[f64], mu: f64) -> Result<Vec<f64>> {
        if !(mu >= 0.0) {
            return Err(Error::InvalidParameter(format!("metric mass must be ≥ 0, got {mu}")));
        }
        let m = self.n - 1;
        let key = mu.to_bits();
        let cached = {
            let cache = self.sobolev.lock().expect("factor cache poisoned");
            cache.iter().find(|(k, _)| *k == key).map(|(_, c)| c.clone())
        };
        let chol = match cached {
            Some(c) => c,
            None => {
                let mut s = self.dirichlet.leading(m);
                let diag: Vec<f64> = self.weights[..m].iter().map(|w| mu * w).collect();
                s.add_diagonal(&diag);
                let c = Arc::new(s.cholesky()?);
                let mut cache = self.sobolev.lock().expect("factor cache poisoned");
                if cache.len() >= 8 {
                    cache.remove(0);
                }
                cache.push((key, c.clone()));
                c
            }
        };
        let mut x = chol.solve(&rhs[..m]);
        x.push(0.0);
        Ok(x)
    }

    fn dilate(&self, u: &[f64], t: f64) -> Vec<f64> {
        let f = self.interpolant(u);
        self.r.iter().map(|&r| t * t * f.eval(self.xi_of(t * r))).collect()
    }

    fn spec(&self) -> GridSpec {
        GridSpec::Radial { n: self.n, r_max: self.r_max, cluster: self.cluster }
    }
}
