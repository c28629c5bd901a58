//! Discrete radial and box representations of scalar fields, their norms,
//! the Dirichlet form, and the fibering dilation `u ↦ t²u(t·)`.

mod banded;
mod boxgrid;
mod fft3;
mod interp;
mod io;
mod radial;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use banded::{BandedCholesky, SymBanded};
pub use boxgrid::BoxGrid;
pub use fft3::{freq_index, Fft3};
pub use interp::MonotoneCubic;
pub use io::{
    box_field_bytes, box_sidecar, radial_csv, read_box_field, read_radial_csv, write_box_field, write_radial_csv,
    BoxSidecar,
};
pub use radial::RadialGrid;

/// Fraction of the outer radius beyond which mass counts as "tail".
pub const TAIL_SHELL: f64 = 0.9;

/// Common interface of the radial and box discretizations.
///
/// Discrete gradients throughout the crate are Euclidean derivatives with
/// respect to node values; `weights` converts them to L² densities and
/// `sobolev_solve` to H¹ representatives.
pub trait Grid: std::fmt::Debug + Send + Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weights for `∫_{ℝ³} f`.
    fn weights(&self) -> &[f64];

    /// Radial distance (radial grid) or max-norm distance (box) of node `i`.
    fn radius(&self, i: usize) -> f64;

    /// Extent of the grid in the same distance as [`Grid::radius`].
    fn outer_radius(&self) -> f64;

    /// `‖∇u‖₂²` of the discrete field.
    fn dirichlet_form(&self, u: &[f64]) -> f64;

    /// Symmetric matrix `A` with `dirichlet_form(u) = uᵀ A u`, applied to `u`.
    fn dirichlet_apply(&self, u: &[f64]) -> Vec<f64>;

    /// Nodes held at zero by iterative solvers.
    fn pinned(&self) -> &[usize];

    /// Solves `(A + μ diag(weights)) x = rhs` on the free nodes; pinned
    /// entries of the result are zero.
    fn sobolev_solve_with_mass(&self, rhs: &[f64], mu: f64) -> Result<Vec<f64>>;

    /// [`Grid::sobolev_solve_with_mass`] with `μ = 1`, the H¹ inner product.
    fn sobolev_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.sobolev_solve_with_mass(rhs, 1.0)
    }

    /// Node values of `x ↦ t²u(tx)`, resampled by monotone cubic
    /// interpolation with zero extension outside the grid.
    fn dilate(&self, u: &[f64], t: f64) -> Vec<f64>;

    fn spec(&self) -> GridSpec;
}

/// Serializable description from which a grid can be rebuilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    Radial {
        n: usize,
        r_max: f64,
        #[serde(default)]
        cluster: f64,
    },
    Box { n_per_axis: usize, half_width: f64 },
}

/// A grid of either kind behind one type, for code that is generic at runtime.
#[derive(Debug, Clone)]
pub enum AnyGrid {
    Radial(Arc<RadialGrid>),
    Box(Arc<BoxGrid>),
}

impl GridSpec {
    pub fn build(&self) -> Result<AnyGrid> {
        Ok(match *self {
            GridSpec::Radial { n, r_max, cluster } => {
                AnyGrid::Radial(Arc::new(RadialGrid::stretched(n, r_max, cluster)?))
            }
            GridSpec::Box { n_per_axis, half_width } => {
                AnyGrid::Box(Arc::new(BoxGrid::new(n_per_axis, half_width)?))
            }
        })
    }
}

/// Real samples of a scalar field on a shared grid.
#[derive(Debug)]
pub struct Field<G> {
    grid: Arc<G>,
    values: Vec<f64>,
}

impl<G> Clone for Field<G> {
    fn clone(&self) -> Self {
        Field { grid: self.grid.clone(), values: self.values.clone() }
    }
}

pub type RadialField = Field<RadialGrid>;
pub type BoxField = Field<BoxGrid>;

impl<G: Grid> Field<G> {
    pub fn new(grid: Arc<G>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("sample {i} is {}", values[i])));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Arc<G>) -> Self {
        let n = grid.len();
        Field { grid, values: vec![0.0; n] }
    }

    pub fn grid(&self) -> &Arc<G> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &Field<G>) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.spec() == other.grid.spec()
    }

    /// Pointwise map; fails if the result is not finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Field::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Field { grid: self.grid.clone(), values: self.values.iter().map(|v| s * v).collect() }
    }

    /// `∫ f`.
    pub fn integral(&self) -> f64 {
        self.grid.weights().iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    /// Pointwise square.
    pub fn square(&self) -> Self {
        Field { grid: self.grid.clone(), values: self.values.iter().map(|v| v * v).collect() }
    }
}

impl RadialField {
    pub fn from_radial(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Field::new(grid, values)
    }
}

impl BoxField {
    pub fn from_fn(grid: Arc<BoxGrid>, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Field::new(grid, values)
    }
}

/// `(∫|f|^p)^{1/p}` for `p ∈ [1, ∞]`; `p = ∞` gives the max norm.
pub fn lp_norm<G: Grid>(f: &Field<G>, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("Lᵖ exponent must be ≥ 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.values.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    }
    Ok(lp_integral(f, p).powf(1.0 / p))
}

/// `∫|f|^p` without the root.
pub fn lp_integral<G: Grid>(f: &Field<G>, p: f64) -> f64 {
    f.grid
        .weights()
        .iter()
        .zip(&f.values)
        .map(|(w, v)| w * v.abs().powf(p))
        .sum()
}

/// `‖∇f‖₂`.
pub fn dirichlet_seminorm<G: Grid>(f: &Field<G>) -> f64 {
    f.grid.dirichlet_form(&f.values).max(0.0).sqrt()
}

/// `x ↦ t²u(tx)` on the same grid.
pub fn fibering_rescale<G: Grid>(u: &Field<G>, t: f64) -> Result<Field<G>> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("dilation factor must be positive, got {t}")));
    }
    if t == 1.0 {
        return Ok(Field { grid: u.grid.clone(), values: u.values.clone() });
    }
    Field::new(u.grid.clone(), u.grid.dilate(&u.values, t))
}

/// Fraction of `∫|u|⁶` carried by the outer 10% of the grid.
pub fn tail_mass_fraction<G: Grid>(u: &Field<G>) -> f64 {
    let g = &u.grid;
    let cut = TAIL_SHELL * g.outer_radius();
    let (mut total, mut tail) = (0.0, 0.0);
    for (i, (w, v)) in g.weights().iter().zip(&u.values).enumerate() {
        let m = w * v.powi(6);
        total += m;
        if g.radius(i) > cut {
            tail += m;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// Weighted inner product `∫ f g`.
pub fn inner<G: Grid>(f: &Field<G>, g: &Field<G>) -> Result<f64> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch("fields live on different grids".into()));
    }
    Ok(f.grid.weights().iter().zip(f.values.iter().zip(&g.values)).map(|(w, (a, b))| w * a * b).sum())
}
