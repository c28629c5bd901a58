//! Radial convolutions with the exact spherically averaged kernels,
//! evaluated in O(N) by two-sided exponential recursions.
//!
//! For shells of radii `r` and `s` the averaged kernels are
//! `1/max(r,s)` (Coulomb), `a/(2rs)·(e^{-|r-s|/a} - e^{-(r+s)/a})` (Yukawa) and
//! `a/(2rs)·((|r-s|+a)e^{-|r-s|/a} - (r+s+a)e^{-(r+s)/a})` (bare exponential).
//! The node sums are trapezoid rules in the grid coordinate. The Coulomb and
//! Yukawa pieces each have a kink at `s = r`, which costs `h²/12` times the
//! jump of the integrand's slope (`h` the local spacing); that term is
//! removed explicitly, so every quantity here is fourth-order accurate.

use std::f64::consts::PI;

use crate::grid::{Grid, RadialGrid};

/// Pieces of `K∗ρ` at the grid nodes.
#[derive(Debug, Clone)]
pub struct RadialParts {
    /// `(1/|x|) ∗ ρ`.
    pub coulomb: Vec<f64>,
    /// `(e^{-|x|/a}/|x|) ∗ ρ`.
    pub yukawa: Vec<f64>,
    /// Radial derivative of `K∗ρ`.
    pub dphi: Vec<f64>,
    /// Radial derivative of the Yukawa piece at the last node.
    pub dyukawa_outer: f64,
}

impl RadialParts {
    pub fn phi(&self) -> Vec<f64> {
        self.coulomb.iter().zip(&self.yukawa).map(|(c, y)| c - y).collect()
    }
}

struct Sums {
    g: Vec<f64>,
    big_g: Vec<f64>,
    e2: Vec<f64>,
    p2: Vec<f64>,
    /// `q[j] = e^{-(r_j - r_{j-1})/a}`, `q[0]` unused.
    q: Vec<f64>,
}

fn prepare(grid: &RadialGrid, rho: &[f64], a: f64) -> Sums {
    let r = grid.nodes();
    let g: Vec<f64> = grid.weights().iter().zip(rho).map(|(w, v)| w * v).collect();
    let big_g = g.iter().zip(r).map(|(g, r)| g / r).collect();
    let e2 = r.iter().map(|&r| -(-2.0 * r / a).exp_m1()).collect();
    let p2 = r.iter().map(|&r| 1.0 + (-2.0 * r / a).exp()).collect();
    let mut q = vec![0.0; r.len()];
    for j in 1..r.len() {
        q[j] = (-(r[j] - r[j - 1]) / a).exp();
    }
    Sums { g, big_g, e2, p2, q }
}

/// Forward sums `A_i = Σ_{j≤i} G_j e^{-(r_i-r_j)/a} c_j` for a per-node factor `c`.
fn forward(s: &Sums, c: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(s.g.len());
    let mut acc = 0.0;
    for j in 0..s.g.len() {
        acc = s.q[j] * acc + s.big_g[j] * c(j);
        out.push(acc);
    }
    out
}

/// Backward sums `B_i = Σ_{j>i} G_j e^{-(r_j-r_i)/a} c_j`.
fn backward(s: &Sums, c: impl Fn(usize) -> f64) -> Vec<f64> {
    let n = s.g.len();
    let mut out = vec![0.0; n];
    for i in (0..n - 1).rev() {
        out[i] = s.q[i + 1] * (out[i + 1] + s.big_g[i + 1] * c(i + 1));
    }
    out
}

/// Coulomb, Yukawa and `∂_r(K∗ρ)` on the grid for length `a`.
pub fn radial_parts(grid: &RadialGrid, rho: &[f64], a: f64) -> RadialParts {
    let r = grid.nodes();
    let n = r.len();
    let s = prepare(grid, rho, a);
    let big_a = forward(&s, |j| s.e2[j]);
    let big_b = backward(&s, |_| 1.0);

    let mut prefix = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &g in &s.g {
        acc += g;
        prefix.push(acc);
    }
    let mut suffix = vec![0.0; n];
    for i in (0..n - 1).rev() {
        suffix[i] = suffix[i + 1] + s.big_g[i + 1];
    }

    let mut coulomb = Vec::with_capacity(n);
    let mut yukawa = Vec::with_capacity(n);
    let mut dphi = Vec::with_capacity(n);
    let mut dyukawa_outer = 0.0;
    for i in 0..n {
        let ri = r[i];
        let kink = PI * grid.local_spacing(i).powi(2) / 3.0;
        let c = prefix[i] / ri + suffix[i];
        let y = a / (2.0 * ri) * (big_a[i] + s.e2[i] * big_b[i]);
        // both derivatives take the s ≤ r branch at the diagonal; their
        // jumps there cancel in the difference
        let dc = -prefix[i] / (ri * ri);
        let dy = -y / ri + (-big_a[i] + s.p2[i] * big_b[i]) / (2.0 * ri);
        coulomb.push(c - kink * rho[i]);
        yukawa.push(y - kink * rho[i]);
        dphi.push(dc - dy);
        if i == n - 1 {
            dyukawa_outer = dy;
        }
    }
    RadialParts { coulomb, yukawa, dphi, dyukawa_outer }
}

/// `K_a∗ρ` at the nodes.
pub fn radial_potential(grid: &RadialGrid, rho: &[f64], a: f64) -> Vec<f64> {
    radial_parts(grid, rho, a).phi()
}

/// `e^{-|x|/a} ∗ ρ` at the nodes.
pub fn radial_exponential(grid: &RadialGrid, rho: &[f64], a: f64) -> Vec<f64> {
    let r = grid.nodes();
    let s = prepare(grid, rho, a);
    let big_a = forward(&s, |j| s.e2[j]);
    let a2 = forward(&s, |j| r[j] * s.p2[j]);
    let big_b = backward(&s, |_| 1.0);
    let b1 = backward(&s, |j| r[j] + a);
    (0..r.len())
        .map(|i| {
            let ri = r[i];
            a / (2.0 * ri)
                * ((ri + a) * big_a[i] - a2[i] + s.e2[i] * b1[i] - ri * s.p2[i] * big_b[i])
        })
        .collect()
}

/// `(V_a(ρ,ρ), X_a(ρ,ρ))` with `X_a = ∫∫ e^{-|x-y|/a} ρρ`.
pub fn radial_self_energy(grid: &RadialGrid, rho: &[f64], a: f64) -> (f64, f64) {
    let phi = radial_potential(grid, rho, a);
    let x = radial_exponential(grid, rho, a);
    let w = grid.weights();
    let mut v = 0.0;
    let mut xx = 0.0;
    for i in 0..rho.len() {
        v += w[i] * rho[i] * phi[i];
        xx += w[i] * rho[i] * x[i];
    }
    (v, xx)
}

/// Fourth-order radial Laplacian `(r f)''/r` of samples on the first
/// `f.len()` nodes, returned on the first `f.len() - 2`, using the even
/// extension of `f` about the origin.
pub fn radial_laplacian(grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    mapped_laplacian(&grid.nodes()[..n], &grid.stretch_factors()[..n], grid.xi_step(), grid.cluster(), f)
}

/// Every `stride`-th node of a radial grid, `ξ_m = (m+1)·stride·Δξ`.
pub struct SubGrid {
    pub index: Vec<usize>,
    pub nodes: Vec<f64>,
    pub stretch: Vec<f64>,
    pub xi_step: f64,
    cluster: f64,
}

impl SubGrid {
    pub fn new(grid: &RadialGrid, stride: usize) -> Self {
        let index: Vec<usize> = (1..=grid.len() / stride).map(|m| m * stride - 1).collect();
        SubGrid {
            nodes: index.iter().map(|&i| grid.nodes()[i]).collect(),
            stretch: index.iter().map(|&i| grid.stretch_factors()[i]).collect(),
            index,
            xi_step: stride as f64 * grid.xi_step(),
            cluster: grid.cluster(),
        }
    }

    /// Full-grid samples restricted to the sub-grid.
    pub fn restrict(&self, f: &[f64]) -> Vec<f64> {
        self.index.iter().map(|&i| f[i]).collect()
    }

    /// [`radial_laplacian`] on the sub-grid for the first `f.len()` nodes.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        mapped_laplacian(&self.nodes[..n], &self.stretch[..n], self.xi_step, self.cluster, f)
    }
}

/// `(r f)''/r` for nodes `r_m = r(ξ_m)` on the uniform `ξ_m = (m+1)h`.
fn mapped_laplacian(r: &[f64], dr: &[f64], h: f64, cluster: f64, f: &[f64]) -> Vec<f64> {
    let beta2 = cluster * cluster;
    let n = f.len();
    // v_k = r_k f_k for k = 1..=n, v_0 = 0, odd reflection below the origin
    let v = |k: i64| -> f64 {
        match k {
            0 => 0.0,
            k if k < 0 => -r[(-k - 1) as usize] * f[(-k - 1) as usize],
            k => r[(k - 1) as usize] * f[(k - 1) as usize],
        }
    };
    (0..n - 2)
        .map(|i| {
            let k = i as i64 + 1;
            let d1 = (-v(k + 2) + 8.0 * v(k + 1) - 8.0 * v(k - 1) + v(k - 2)) / (12.0 * h);
            let d2 = (-v(k + 2) + 16.0 * v(k + 1) - 30.0 * v(k) + 16.0 * v(k - 1) - v(k - 2))
                / (12.0 * h * h);
            // r'' = β² r for the sinh stretch
            let vrr = (d2 - beta2 * r[i] * d1 / dr[i]) / (dr[i] * dr[i]);
            vrr / r[i]
        })
        .collect()
}
