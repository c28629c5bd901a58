//! The potential `φ = K∗u²` by two independent routes (exact radial
//! reduction, truncated-kernel spectral convolution on a box), the residual
//! of `-Δφ + a²Δ²φ = 4πu²`, and the energy identity
//! `‖∇φ‖₂² + a²‖Δφ‖₂² = 4π∫φu²`.

mod radial;
mod spectral;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::grid::{BoxField, BoxGrid, Field, Grid, RadialField, RadialGrid, TAIL_SHELL};
use crate::kernel::KernelParams;
use crate::{Error, Result};

pub use radial::{
    radial_exponential, radial_laplacian, radial_parts, radial_potential, radial_self_energy, RadialParts,
    SubGrid,
};
pub use spectral::{truncated_exponential_hat, truncated_kernel_hat, PADDING};
use spectral::Padded;

/// Sub-grid size for the radial strong residual.
pub const RESIDUAL_POINTS: usize = 512;

/// Largest fraction of the source allowed in the outer shell of a box.
pub const BOX_BOUNDARY_MASS: f64 = 1e-6;

/// Grids on which `K∗ρ` and the self-energies can be evaluated.
pub trait ConvolutionGrid: Grid + Sized {
    /// `K_a∗ρ` at the nodes, for any sign of `ρ`.
    fn potential_values(&self, rho: &[f64], a: f64) -> Vec<f64>;

    /// `e^{-|·|/a}∗ρ` at the nodes.
    fn exponential_values(&self, rho: &[f64], a: f64) -> Vec<f64>;

    /// `b ↦ (V_b(ρ,ρ), X_b(ρ,ρ))`, where `X_b = ∫∫ e^{-|x-y|/b} ρρ = -b² ∂_b V_b`.
    /// Any transform of `ρ` is done once, up front.
    fn energy_profile<'a>(&'a self, rho: &[f64]) -> Box<dyn Fn(f64) -> (f64, f64) + 'a>;

    fn self_energies(&self, rho: &[f64], lengths: &[f64]) -> Vec<(f64, f64)> {
        let profile = self.energy_profile(rho);
        lengths.iter().map(|&b| profile(b)).collect()
    }

    fn solve_potential(u2: &Field<Self>, p: &KernelParams) -> Result<Potential<Self>>;

    fn pde_residual(phi: &Potential<Self>, u2: &Field<Self>) -> Result<PdeResidual>;
}

/// A solved potential with its `𝒜`-norm.
#[derive(Debug, Clone)]
pub struct Potential<G> {
    field: Field<G>,
    a_norm_sq: f64,
    params: KernelParams,
    aux: Aux,
}

#[derive(Debug, Clone)]
enum Aux {
    Radial,
    Box(Arc<Vec<f64>>),
}

impl<G: Grid> Potential<G> {
    pub fn field(&self) -> &Field<G> {
        &self.field
    }

    /// `‖∇φ‖₂² + a²‖Δφ‖₂²`.
    pub fn a_norm_sq(&self) -> f64 {
        self.a_norm_sq
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// Same solve data with replaced samples; the residual is then evaluated
    /// on the new samples.
    pub fn with_field(&self, field: Field<G>) -> Result<Self> {
        if !field.same_grid(&self.field) {
            return Err(Error::GridMismatch("replacement field lives on another grid".into()));
        }
        Ok(Potential { field, a_norm_sq: self.a_norm_sq, params: self.params, aux: self.aux.clone() })
    }
}

/// Discrete L² norm of `-Δφ + a²Δ²φ - 4πu²`, absolute and relative to `‖4πu²‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeResidual {
    pub absolute: f64,
    pub relative: f64,
}

/// Summary written next to a serialized potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialRecord {
    pub a: f64,
    pub source_hash: String,
    pub a_norm_sq: f64,
    pub residual: f64,
    pub identity_gap: f64,
}

impl PotentialRecord {
    pub fn new<G: ConvolutionGrid>(phi: &Potential<G>, u2: &Field<G>) -> Result<Self> {
        Ok(PotentialRecord {
            a: phi.params.a,
            source_hash: hash_samples(u2.values()),
            a_norm_sq: phi.a_norm_sq,
            residual: pde_residual(phi, u2)?.relative,
            identity_gap: energy_identity_gap(phi, u2)?,
        })
    }
}

/// SHA-256 of the little-endian bytes of `values`, as hex.
pub fn hash_samples(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn check_source<G: Grid>(u2: &Field<G>) -> Result<()> {
    let max = u2.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(i) = u2.values().iter().position(|&v| v < -1e-12 * max) {
        return Err(Error::Precondition(format!(
            "source must be nonnegative; sample {i} is {}",
            u2.values()[i]
        )));
    }
    Ok(())
}

pub fn solve_potential_radial(u2: &RadialField, p: &KernelParams) -> Result<Potential<RadialGrid>> {
    RadialGrid::solve_potential(u2, p)
}

pub fn solve_potential_box(u2: &BoxField, p: &KernelParams) -> Result<Potential<BoxGrid>> {
    BoxGrid::solve_potential(u2, p)
}

pub fn pde_residual<G: ConvolutionGrid>(phi: &Potential<G>, u2: &Field<G>) -> Result<PdeResidual> {
    if !phi.field.same_grid(u2) {
        return Err(Error::GridMismatch("potential and source live on different grids".into()));
    }
    G::pde_residual(phi, u2)
}

/// `|‖φ‖_𝒜² - 4π∫φu²| / ‖φ‖_𝒜²`.
pub fn energy_identity_gap<G: Grid>(phi: &Potential<G>, u2: &Field<G>) -> Result<f64> {
    let rhs = 4.0 * PI * crate::grid::inner(&phi.field, u2)?;
    Ok((phi.a_norm_sq - rhs).abs() / phi.a_norm_sq.max(f64::MIN_POSITIVE))
}

impl ConvolutionGrid for RadialGrid {
    fn potential_values(&self, rho: &[f64], a: f64) -> Vec<f64> {
        radial_potential(self, rho, a)
    }

    fn exponential_values(&self, rho: &[f64], a: f64) -> Vec<f64> {
        radial_exponential(self, rho, a)
    }

    fn energy_profile<'a>(&'a self, rho: &[f64]) -> Box<dyn Fn(f64) -> (f64, f64) + 'a> {
        let rho = rho.to_vec();
        Box::new(move |b| radial_self_energy(self, &rho, b))
    }

    fn solve_potential(u2: &RadialField, p: &KernelParams) -> Result<Potential<RadialGrid>> {
        check_source(u2)?;
        let grid = u2.grid();
        let a = p.a;
        let parts = radial_parts(grid, u2.values(), a);
        let phi = parts.phi();
        let w = grid.weights();
        let mut inside = 0.0;
        for i in 0..phi.len() {
            let lap = parts.yukawa[i] / a;
            inside += w[i] * (parts.dphi[i].powi(2) + lap * lap);
        }
        // exterior of the ball by Green's identity for the source-free equation
        let last = phi.len() - 1;
        let big_r = grid.nodes()[last];
        let (f, df) = (phi[last], parts.dphi[last]);
        let (y, dy) = (parts.yukawa[last], parts.dyukawa_outer);
        let outside = -4.0 * PI * big_r * big_r * (f * df - y * df + f * dy);
        Ok(Potential {
            field: Field::new(grid.clone(), phi)?,
            a_norm_sq: inside + outside,
            params: *p,
            aux: Aux::Radial,
        })
    }

    fn pde_residual(phi: &Potential<RadialGrid>, u2: &RadialField) -> Result<PdeResidual> {
        // Δ² by finite differences loses ε/h⁴ to rounding, so the residual is
        // taken on a sub-grid of about RESIDUAL_POINTS nodes
        let grid = u2.grid();
        let a2 = phi.params.a.powi(2);
        let sub = SubGrid::new(grid, (grid.len() / RESIDUAL_POINTS).max(1));
        let lap = sub.laplacian(&sub.restrict(phi.field.values()));
        let lap2 = sub.laplacian(&lap);
        let u2 = sub.restrict(u2.values());
        let (mut res, mut src) = (0.0, 0.0);
        for m in 0..lap2.len() {
            let (r, w) = (sub.nodes[m], sub.stretch[m] * sub.xi_step);
            let w = 4.0 * PI * r * r * w;
            let s = 4.0 * PI * u2[m];
            res += w * (-lap[m] + a2 * lap2[m] - s).powi(2);
            src += w * s * s;
        }
        Ok(residual_pair(res, src))
    }
}

fn residual_pair(res: f64, src: f64) -> PdeResidual {
    let absolute = res.sqrt();
    PdeResidual { absolute, relative: if src > 0.0 { absolute / src.sqrt() } else { absolute } }
}

/// Fraction of `∫|ρ|` in the outer shell of the box.
pub fn box_boundary_mass(rho: &BoxField) -> f64 {
    let g = rho.grid();
    let cut = TAIL_SHELL * g.outer_radius();
    let (mut total, mut shell) = (0.0, 0.0);
    for (i, v) in rho.values().iter().enumerate() {
        total += v.abs();
        if g.radius(i) > cut {
            shell += v.abs();
        }
    }
    if total > 0.0 {
        shell / total
    } else {
        0.0
    }
}

/// Third-order Gregory weights for `m` equispaced nodes spanning `[0, (m-1)h]`.
fn gregory_weights(m: usize, h: f64) -> Vec<f64> {
    assert!(m >= 6);
    let mut w = vec![h; m];
    for (k, c) in [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0].into_iter().enumerate() {
        w[k] = c * h;
        w[m - 1 - k] = c * h;
    }
    w
}

/// Inverse transform of `s1 + i s2`, whose halves are spectra of real fields,
/// restricted to the first `m` nodes per axis.
fn two_real_fields(pad: &Padded, mut data: Vec<Complex64>, m: usize) -> (Vec<f64>, Vec<f64>) {
    pad.fft.inverse(&mut data);
    let mut re = Vec::with_capacity(m * m * m);
    let mut im = Vec::with_capacity(m * m * m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let c = data[pad.idx(i, j, k)];
                re.push(c.re);
                im.push(c.im);
            }
        }
    }
    (re, im)
}

impl ConvolutionGrid for BoxGrid {
    fn potential_values(&self, rho: &[f64], a: f64) -> Vec<f64> {
        let pad = Padded::new(self);
        let table = pad.radial_table(|k| truncated_kernel_hat(k, a, pad.cutoff()));
        let mut data = pad.transform(rho);
        let norm = 1.0 / pad.len() as f64;
        pad.for_each_bin(|idx, _, m2| data[idx] *= table[m2 as usize] * norm);
        two_real_fields(&pad, data, self.n_per_axis()).0
    }

    fn exponential_values(&self, rho: &[f64], a: f64) -> Vec<f64> {
        let pad = Padded::new(self);
        let table = pad.radial_table(|k| truncated_exponential_hat(k, a, pad.cutoff()));
        let mut data = pad.transform(rho);
        let norm = 1.0 / pad.len() as f64;
        pad.for_each_bin(|idx, _, m2| data[idx] *= table[m2 as usize] * norm);
        two_real_fields(&pad, data, self.n_per_axis()).0
    }

    fn energy_profile<'a>(&'a self, rho: &[f64]) -> Box<dyn Fn(f64) -> (f64, f64) + 'a> {
        let pad = Padded::new(self);
        let data = pad.transform(rho);
        let mut buckets = vec![0.0; pad.max_m2() + 1];
        pad.for_each_bin(|idx, _, m2| buckets[m2 as usize] += data[idx].norm_sqr());
        let scale = self.spacing().powi(3) / pad.len() as f64;
        let t = pad.cutoff();
        let dk = pad.dk();
        let occupied: Vec<(f64, f64)> = buckets
            .iter()
            .enumerate()
            .filter(|(_, s)| **s != 0.0)
            .map(|(m2, s)| (dk * (m2 as f64).sqrt(), *s))
            .collect();
        Box::new(move |b| {
            let (mut v, mut x) = (0.0, 0.0);
            for &(k, s) in &occupied {
                v += truncated_kernel_hat(k, b, t) * s;
                x += truncated_exponential_hat(k, b, t) * s;
            }
            (scale * v, scale * x)
        })
    }

    fn solve_potential(u2: &BoxField, p: &KernelParams) -> Result<Potential<BoxGrid>> {
        check_source(u2)?;
        let shell = box_boundary_mass(u2);
        if shell > BOX_BOUNDARY_MASS {
            return Err(Error::Precondition(format!(
                "{shell:.2e} of the source lies in the outer 10% of the box; enlarge the half-width"
            )));
        }
        let grid = u2.grid();
        let n = grid.n_per_axis();
        let a = p.a;
        let pad = Padded::new(grid);
        let table = pad.radial_table(|k| truncated_kernel_hat(k, a, pad.cutoff()));
        let mut phi_hat = pad.transform(u2.values());
        let norm = 1.0 / pad.len() as f64;
        let nyq = (pad.np / 2) as i64;
        pad.for_each_bin(|idx, _, m2| phi_hat[idx] *= table[m2 as usize] * norm);

        let dk = pad.dk();
        let i_unit = Complex64::new(0.0, 1.0);
        // spectral derivative factor, zero at the Nyquist bin so that the
        // derivative of a real field stays real
        let deriv = |m: i64| if m.abs() == nyq { 0.0 } else { m as f64 * dk };
        let build = |f: &dyn Fn([i64; 3], u64) -> (Complex64, Complex64)| {
            let mut out = vec![Complex64::new(0.0, 0.0); pad.len()];
            pad.for_each_bin(|idx, m, m2| {
                let (s1, s2) = f(m, m2);
                out[idx] = phi_hat[idx] * (s1 + i_unit * s2);
            });
            out
        };
        let lap = |m2: u64| -(m2 as f64) * dk * dk;
        let m = n + 1;
        let (phi, lap_phi) =
            two_real_fields(&pad, build(&|_, m2| (Complex64::new(1.0, 0.0), Complex64::new(lap(m2), 0.0))), m);
        let (dx, dy) = two_real_fields(
            &pad,
            build(&|mm, _| (i_unit * deriv(mm[0]), i_unit * deriv(mm[1]))),
            m,
        );
        let (dz, dlx) = two_real_fields(
            &pad,
            build(&|mm, m2| (i_unit * deriv(mm[2]), i_unit * deriv(mm[0]) * lap(m2))),
            m,
        );
        let (dly, dlz) = two_real_fields(
            &pad,
            build(&|mm, m2| (i_unit * deriv(mm[1]) * lap(m2), i_unit * deriv(mm[2]) * lap(m2))),
            m,
        );

        let h = grid.spacing();
        let gw = gregory_weights(m, h);
        let a2 = a * a;
        let at = |i: usize, j: usize, k: usize| (i * m + j) * m + k;
        let mut inside = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let q = at(i, j, k);
                    let g2 = dx[q] * dx[q] + dy[q] * dy[q] + dz[q] * dz[q];
                    inside += gw[i] * gw[j] * gw[k] * (g2 + a2 * lap_phi[q] * lap_phi[q]);
                }
            }
        }
        // exterior of the cube by Green's identity for the source-free equation
        let mut flux = 0.0;
        let grads = [&dx, &dy, &dz];
        let lgrads = [&dlx, &dly, &dlz];
        for axis in 0..3 {
            for (side, sign) in [(0usize, -1.0), (n, 1.0)] {
                for u in 0..m {
                    for v in 0..m {
                        let q = match axis {
                            0 => at(side, u, v),
                            1 => at(u, side, v),
                            _ => at(u, v, side),
                        };
                        let dn = sign * grads[axis][q];
                        let dln = sign * lgrads[axis][q];
                        let f = phi[q] * dn + a2 * lap_phi[q] * dn - a2 * phi[q] * dln;
                        flux += gw[u] * gw[v] * f;
                    }
                }
            }
        }
        let a_norm_sq = inside - flux;

        // keep the periodic potential for residual checks
        let mut periodic = phi_hat;
        pad.fft.inverse(&mut periodic);
        let periodic: Vec<f64> = periodic.iter().map(|c| c.re).collect();
        let mut values = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    values.push(periodic[pad.idx(i, j, k)]);
                }
            }
        }
        Ok(Potential {
            field: Field::new(grid.clone(), values)?,
            a_norm_sq,
            params: *p,
            aux: Aux::Box(Arc::new(periodic)),
        })
    }

    fn pde_residual(phi: &Potential<BoxGrid>, u2: &BoxField) -> Result<PdeResidual> {
        let grid = u2.grid();
        let n = grid.n_per_axis();
        let pad = Padded::new(grid);
        let Aux::Box(periodic) = &phi.aux else {
            return Err(Error::Precondition("box potential lacks its padded samples".into()));
        };
        let mut data: Vec<Complex64> = periodic.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    data[pad.idx(i, j, k)] = Complex64::new(phi.field.values()[(i * n + j) * n + k], 0.0);
                }
            }
        }
        pad.fft.forward(&mut data);
        let dk = pad.dk();
        let a2 = phi.params.a.powi(2);
        let norm = 1.0 / pad.len() as f64;
        pad.for_each_bin(|idx, _, m2| {
            let k2 = m2 as f64 * dk * dk;
            data[idx] *= k2 * (1.0 + a2 * k2) * norm;
        });
        let (lphi, _) = two_real_fields(&pad, data, n);
        let (mut res, mut src) = (0.0, 0.0);
        for (l, s) in lphi.iter().zip(u2.values()) {
            let s = 4.0 * PI * s;
            res += (l - s).powi(2);
            src += s * s;
        }
        let w = grid.spacing().powi(3);
        Ok(residual_pair(w * res, w * src))
    }
}
