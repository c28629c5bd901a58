//! The action `I_ε`, the Pohozaev functional `P_ε`, the Nehari–Pohozaev
//! functional `J_ε = 2I_ε'(u)[u] - P_ε(u)`, their first variation and
//! gradients, and the fibering map `t ↦ I_ε(t²u(t·))`.

use roots::{find_root_brent, Convergency};
use serde::{Deserialize, Serialize};

use crate::grid::{lp_integral, Field};
use crate::kernel::KernelParams;
use crate::potential::ConvolutionGrid;
use crate::{Error, Result};

/// Kernel parameters, nonlinearity exponent `p ∈ (3,6)` and mass `ε ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub kernel: KernelParams,
    pub p: f64,
    pub epsilon: f64,
}

impl ProblemParams {
    pub fn new(kernel: KernelParams, p: f64, epsilon: f64) -> Result<Self> {
        if !(p > 3.0 && p < 6.0) {
            return Err(Error::InvalidParameter(format!("p must lie in (3,6), got {p}")));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be ≥ 0, got {epsilon}")));
        }
        Ok(ProblemParams { kernel, p, epsilon })
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        ProblemParams::new(self.kernel, self.p, epsilon)
    }
}

/// Raw integrals of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integrals {
    /// `‖∇u‖₂²`
    pub grad_sq: f64,
    /// `‖u‖₂²`
    pub l2_sq: f64,
    /// `‖u‖_p^p`
    pub lp: f64,
    /// `V(u²,u²)`
    pub v: f64,
    /// `∫∫ e^{-|x-y|/a} u²u²`
    pub x: f64,
}

/// Every term of `I`, `I_ε`, `P_ε` and `J_ε` at one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `½‖∇u‖₂²`
    pub dirichlet: f64,
    /// `½‖u‖₂²`
    pub mass: f64,
    /// `¼V(u²,u²)`
    pub bp: f64,
    /// `(1/p)‖u‖_p^p`
    pub lp: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "I_eps")]
    pub i_eps: f64,
    #[serde(rename = "P_eps")]
    pub p_eps: f64,
    #[serde(rename = "J_eps")]
    pub j_eps: f64,
    /// Sum of the absolute values of the terms of `P_ε`.
    pub p_scale: f64,
    /// Sum of the absolute values of the terms of `J_ε`.
    pub j_scale: f64,
    pub integrals: Integrals,
}

impl EnergyBreakdown {
    pub fn from_integrals(s: Integrals, pp: &ProblemParams) -> Self {
        let (p, eps, q2, a) = (pp.p, pp.epsilon, pp.kernel.q * pp.kernel.q, pp.kernel.a);
        let i = 0.5 * s.grad_sq + 0.25 * q2 * s.v - s.lp / p;
        // kernel [5(1-e^{-r/a}) + (r/a)e^{-r/a}]/r integrates to 5V + X/a
        let p_terms = [
            0.5 * s.grad_sq,
            1.5 * eps * s.l2_sq,
            -3.0 * s.lp / p,
            0.25 * q2 * (5.0 * s.v + s.x / a),
        ];
        // kernel [1 - e^{-r/a} - (r/3a)e^{-r/a}]/r integrates to V - X/(3a)
        let j_terms = [
            1.5 * s.grad_sq,
            0.5 * eps * s.l2_sq,
            -(2.0 * p - 3.0) / p * s.lp,
            0.75 * q2 * (s.v - s.x / (3.0 * a)),
        ];
        EnergyBreakdown {
            dirichlet: 0.5 * s.grad_sq,
            mass: 0.5 * s.l2_sq,
            bp: 0.25 * s.v,
            lp: s.lp / p,
            i,
            i_eps: i + 0.5 * eps * s.l2_sq,
            p_eps: p_terms.iter().sum(),
            j_eps: j_terms.iter().sum(),
            p_scale: p_terms.iter().map(|t| t.abs()).sum(),
            j_scale: j_terms.iter().map(|t| t.abs()).sum(),
            integrals: s,
        }
    }

    /// `I_ε - J_ε/(2p-3)` written as the positive combination
    /// `((p-3)/(2p-3))‖∇u‖² + ((p-2)ε/(2p-3))‖u‖₂² + (q²(p-3)/(2(2p-3)))V
    /// + (q²/(4(2p-3)))∫∫e^{-|x-y|/a}u²u²/a`.
    pub fn recombined(&self, pp: &ProblemParams) -> f64 {
        let s = &self.integrals;
        let (p, eps, q2, a) = (pp.p, pp.epsilon, pp.kernel.q * pp.kernel.q, pp.kernel.a);
        let d = 2.0 * p - 3.0;
        (p - 3.0) / d * s.grad_sq
            + (p - 2.0) * eps / d * s.l2_sq
            + q2 * (p - 3.0) / (2.0 * d) * s.v
            + q2 / (4.0 * d) * s.x / a
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("{name} evaluated to {v}")))
    }
}

/// Raw integrals of `u`.
pub fn integrals<G: ConvolutionGrid>(u: &Field<G>, pp: &ProblemParams) -> Result<Integrals> {
    let grid = u.grid();
    let rho = u.square();
    let (v, x) = grid.energy_profile(rho.values())(pp.kernel.a);
    Ok(Integrals {
        grad_sq: finite("‖∇u‖₂²", grid.dirichlet_form(u.values()))?,
        l2_sq: finite("‖u‖₂²", lp_integral(u, 2.0))?,
        lp: finite("‖u‖_p^p", lp_integral(u, pp.p))?,
        v: finite("V(u²,u²)", v)?,
        x: finite("∫∫e^{-|x-y|/a}u²u²", x)?,
    })
}

pub fn evaluate<G: ConvolutionGrid>(u: &Field<G>, pp: &ProblemParams) -> Result<EnergyBreakdown> {
    Ok(EnergyBreakdown::from_integrals(integrals(u, pp)?, pp))
}

/// Derivative of `I_ε` with respect to each node value (Euclidean gradient).
pub fn node_derivative<G: ConvolutionGrid>(u: &Field<G>, pp: &ProblemParams) -> Vec<f64> {
    let grid = u.grid();
    let uv = u.values();
    let rho: Vec<f64> = uv.iter().map(|v| v * v).collect();
    let phi = grid.potential_values(&rho, pp.kernel.a);
    let q2 = pp.kernel.q * pp.kernel.q;
    let mut g = grid.dirichlet_apply(uv);
    for (i, w) in grid.weights().iter().enumerate() {
        let ui = uv[i];
        g[i] += w * (pp.epsilon * ui + q2 * phi[i] * ui - ui.abs().powf(pp.p - 2.0) * ui);
    }
    g
}

/// Gradient of `J_ε` with respect to the nodal values.
pub fn pohozaev_node_derivative<G: ConvolutionGrid>(u: &Field<G>, pp: &ProblemParams) -> Vec<f64> {
    let grid = u.grid();
    let uv = u.values();
    let rho: Vec<f64> = uv.iter().map(|v| v * v).collect();
    let a = pp.kernel.a;
    let phi = grid.potential_values(&rho, a);
    let psi = grid.exponential_values(&rho, a);
    let q2 = pp.kernel.q * pp.kernel.q;
    let p = pp.p;
    let mut g: Vec<f64> = grid.dirichlet_apply(uv).into_iter().map(|x| 3.0 * x).collect();
    for (i, w) in grid.weights().iter().enumerate() {
        let ui = uv[i];
        g[i] += w
            * (pp.epsilon * ui + 3.0 * q2 * (phi[i] - psi[i] / (3.0 * a)) * ui
                - (2.0 * p - 3.0) * ui.abs().powf(p - 2.0) * ui);
    }
    g
}

/// `I_ε'(u)[v] = ∫∇u·∇v + ε∫uv + q²∫φ_u uv - ∫|u|^{p-2}uv`.
pub fn first_variation<G: ConvolutionGrid>(u: &Field<G>, v: &Field<G>, pp: &ProblemParams) -> Result<f64> {
    if !u.same_grid(v) {
        return Err(Error::GridMismatch("u and v live on different grids".into()));
    }
    Ok(node_derivative(u, pp).iter().zip(v.values()).map(|(g, v)| g * v).sum())
}

/// Inner product defining a gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `⟨f,g⟩ = ∫fg`
    L2,
    /// `⟨f,g⟩ = ∫∇f·∇g + ∫fg` on the free nodes
    Sobolev,
}

/// Riesz representative of `I_ε'(u)` in the chosen metric.
pub fn gradient<G: ConvolutionGrid>(u: &Field<G>, pp: &ProblemParams, metric: Metric) -> Result<Field<G>> {
    let d = node_derivative(u, pp);
    let grid = u.grid();
    let g = match metric {
        Metric::L2 => d.iter().zip(grid.weights()).map(|(d, w)| d / w).collect(),
        Metric::Sobolev => grid.sobolev_solve(&d)?,
    };
    Field::new(grid.clone(), g)
}

/// Maximizer of the fibering map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberingResult {
    pub t_star: f64,
    /// `I_ε(u_{t*})`
    pub value: f64,
    /// `d²/dt² I_ε(u_t)` at `t*`
    pub second_derivative: f64,
    pub bracket: (f64, f64),
    /// Sign changes of `d/dt I_ε(u_t)` on a log scan of `[t*/10³, 10³t*]`;
    /// 1 means the maximizer is unique on that range.
    pub sign_changes: usize,
}

/// `t ↦ I_ε(t²u(t·))` through the exact scaling laws, without resampling.
pub struct FiberingMap<'a> {
    pp: ProblemParams,
    s: Integrals,
    profile: Box<dyn Fn(f64) -> (f64, f64) + 'a>,
}

impl<'a> FiberingMap<'a> {
    pub fn new<G: ConvolutionGrid>(u: &'a Field<G>, pp: &ProblemParams) -> Result<Self> {
        let s = integrals(u, pp)?;
        let profile = u.grid().energy_profile(u.square().values());
        Ok(FiberingMap { pp: *pp, s, profile })
    }

    pub fn integrals(&self) -> &Integrals {
        &self.s
    }

    pub fn value(&self, t: f64) -> f64 {
        let (p, eps, q2, a) = (self.pp.p, self.pp.epsilon, self.pp.kernel.q.powi(2), self.pp.kernel.a);
        let (v, _) = (self.profile)(a * t);
        let t3 = t * t * t;
        0.5 * t3 * self.s.grad_sq + 0.5 * eps * t * self.s.l2_sq + 0.25 * q2 * t3 * v
            - t.powf(2.0 * p - 3.0) / p * self.s.lp
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.derivative_terms(t).iter().sum()
    }

    fn derivative_terms(&self, t: f64) -> [f64; 4] {
        let (p, eps, q2, a) = (self.pp.p, self.pp.epsilon, self.pp.kernel.q.powi(2), self.pp.kernel.a);
        let (v, x) = (self.profile)(a * t);
        let t2 = t * t;
        [
            1.5 * t2 * self.s.grad_sq,
            0.5 * eps * self.s.l2_sq,
            0.25 * q2 * t2 * (3.0 * v - x / (a * t)),
            -(2.0 * p - 3.0) / p * t.powf(2.0 * p - 4.0) * self.s.lp,
        ]
    }
}

struct RootTolerance {
    f_abs: f64,
}

impl Convergency<f64> for RootTolerance {
    fn is_root_found(&mut self, y: f64) -> bool {
        y.abs() <= self.f_abs
    }
    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() <= 4.0 * f64::EPSILON * x1.abs().max(x2.abs())
    }
    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= 200
    }
}

pub const FIBERING_RANGE: (f64, f64) = (1e-6, 1e6);

/// Maximizes `t ↦ I_ε(t²u(t·))` over `t > 0`.
pub fn fibering_maximize<G: ConvolutionGrid>(u: &Field<G>, pp: &ProblemParams) -> Result<FiberingResult> {
    if !(pp.epsilon > 0.0) {
        return Err(Error::InvalidParameter("fibering needs ε > 0".into()));
    }
    if u.values().iter().all(|&v| v == 0.0) {
        return Err(Error::Domain("fibering needs a nonzero state".into()));
    }
    let map = FiberingMap::new(u, pp)?;
    maximize_map(&map)
}

pub fn maximize_map(map: &FiberingMap<'_>) -> Result<FiberingResult> {
    let (lo_lim, hi_lim) = FIBERING_RANGE;
    let d1 = map.derivative(1.0);
    let (mut lo, mut hi) = (1.0, 1.0);
    if d1 > 0.0 {
        loop {
            lo = hi;
            hi *= 2.0;
            if hi > hi_lim {
                return Err(Error::Fibering(format!("I_ε(u_t) still increasing at t = {hi_lim:e}")));
            }
            if map.derivative(hi) < 0.0 {
                break;
            }
        }
    } else if d1 < 0.0 {
        loop {
            hi = lo;
            lo *= 0.5;
            if lo < lo_lim {
                return Err(Error::Fibering(format!("I_ε(u_t) still decreasing at t = {lo_lim:e}")));
            }
            if map.derivative(lo) > 0.0 {
                break;
            }
        }
    }
    let t_star = if lo == hi {
        1.0
    } else {
        let scale: f64 = map.derivative_terms(hi).iter().map(|t| t.abs()).sum();
        let mut conv = RootTolerance { f_abs: 1e-15 * scale };
        find_root_brent(lo, hi, |t| map.derivative(t), &mut conv)
            .map_err(|e| Error::Fibering(format!("root search in [{lo}, {hi}] failed: {e:?}")))?
    };
    let dt = 1e-4 * t_star;
    let second = (map.derivative(t_star + dt) - map.derivative(t_star - dt)) / (2.0 * dt);
    let mut sign_changes = 0;
    let mut prev = map.derivative(t_star * 1e-3).signum();
    for k in 1..=120 {
        let t = t_star * 10f64.powf(-3.0 + k as f64 * 0.05);
        let s = map.derivative(t).signum();
        if s != prev && s != 0.0 {
            sign_changes += 1;
            prev = s;
        }
    }
    Ok(FiberingResult { t_star, value: map.value(t_star), second_derivative: second, bracket: (lo, hi), sign_changes })
}

/// Worst slack of the two scalar inequalities on a `(t, b)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarInequalityReport {
    pub points: usize,
    pub worst_dilation_slack: f64,
    pub worst_dilation_at: (f64, f64),
    pub worst_kernel_slack: f64,
    pub worst_kernel_at: f64,
    pub passed: bool,
}

/// `t³(e^{-b/t} - e^{-b}) + ((1-t³)/3) b e^{-b}`, evaluated without cancellation
/// as `e^{-b}[t³ expm1(b(t-1)/t) - (t-1)(t²+t+1) b/3]`.
pub fn dilation_inequality_lhs(t: f64, b: f64) -> f64 {
    let s = b * (t - 1.0) / t;
    (-b).exp() * (t * t * t * s.exp_m1() - (t - 1.0) * (t * t + t + 1.0) * b / 3.0)
}

/// `½(1 - e^{-b}) - (b/3)e^{-b}`.
pub fn kernel_inequality_lhs(b: f64) -> f64 {
    -0.5 * (-b).exp_m1() - b / 3.0 * (-b).exp()
}

/// Both inequalities on `n_t` log-spaced `t ∈ [1e-3, 1e3]` and `n_b` uniform
/// `b ∈ [0, 50]`, with slack floor `-1e-14`.
pub fn check_scalar_inequalities(n_t: usize, n_b: usize) -> ScalarInequalityReport {
    let mut rep = ScalarInequalityReport {
        points: n_t * n_b,
        worst_dilation_slack: f64::INFINITY,
        worst_dilation_at: (f64::NAN, f64::NAN),
        worst_kernel_slack: f64::INFINITY,
        worst_kernel_at: f64::NAN,
        passed: true,
    };
    for jb in 0..n_b {
        let b = 50.0 * jb as f64 / (n_b - 1) as f64;
        let k = kernel_inequality_lhs(b);
        if k < rep.worst_kernel_slack {
            rep.worst_kernel_slack = k;
            rep.worst_kernel_at = b;
        }
        for it in 0..n_t {
            let t = 10f64.powf(-3.0 + 6.0 * it as f64 / (n_t - 1) as f64);
            let d = dilation_inequality_lhs(t, b);
            if d < rep.worst_dilation_slack {
                rep.worst_dilation_slack = d;
                rep.worst_dilation_at = (t, b);
            }
        }
    }
    rep.passed = rep.worst_dilation_slack >= -1e-14 && rep.worst_kernel_slack >= -1e-14;
    rep
}
