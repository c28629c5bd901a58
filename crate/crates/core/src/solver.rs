//! Ground states for fixed `ε` by descent on the Nehari–Pohozaev set, and the
//! `ε ↘ 0` continuation towards the zero-mass problem.
//!
//! The descent minimizes `E(w) = max_t I_ε(t²w(t·))`, evaluated through the
//! exact scaling laws, so a line search never resamples. The iterate is kept
//! on the set `J_ε = 0`: it is dilated to the fibering maximizer by monotone
//! cubic resampling, then its amplitude is corrected so that the discrete
//! `J_ε` vanishes to rounding.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bp_energy::e_norm;
use crate::functionals::{
    evaluate, fibering_maximize, node_derivative, pohozaev_node_derivative, EnergyBreakdown,
    FiberingResult, ProblemParams,
};
use crate::grid::{lp_norm, BoxField, BoxGrid, Field, Grid, RadialGrid};
use crate::potential::ConvolutionGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Radial,
    Box,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepRule {
    /// Accept `τ` once `E(w - τg) ≤ E(w) - c τ ⟨g, I'⟩`; otherwise multiply by `shrink`.
    BacktrackingArmijo { c: f64, shrink: f64, max_backtracks: usize },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::BacktrackingArmijo { c: 1e-4, shrink: 0.5, max_backtracks: 50 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_outer_iters: usize,
    /// Bound on the H¹-dual norm of `I_ε'(u)`.
    pub grad_tol: f64,
    /// Bound on `|J_ε(u)|`.
    pub j_tol: f64,
    /// Bound on `|P_ε(u)|` relative to the sum of its terms; reported, not enforced.
    pub pohozaev_tol: f64,
    pub step_rule: StepRule,
    pub initial_step: f64,
    pub recenter: bool,
    pub mode: Mode,
    /// Mass `μ` of the descent metric `-Δ + μ`; `None` uses `max(ε, 1e-3)`.
    pub metric_mass: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_outer_iters: 500,
            grad_tol: 1e-6,
            j_tol: 1e-8,
            pohozaev_tol: 1e-4,
            step_rule: StepRule::default(),
            initial_step: 1.0,
            recenter: false,
            mode: Mode::Radial,
            metric_mass: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iters == 0 {
            return Err(Error::InvalidParameter("max_outer_iters must be ≥ 1".into()));
        }
        for (name, v) in [
            ("grad_tol", self.grad_tol),
            ("j_tol", self.j_tol),
            ("pohozaev_tol", self.pohozaev_tol),
            ("initial_step", self.initial_step),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        let StepRule::BacktrackingArmijo { c, shrink, max_backtracks } = self.step_rule;
        if !(c > 0.0 && c < 1.0) || !(shrink > 0.0 && shrink < 1.0) || max_backtracks == 0 {
            return Err(Error::InvalidParameter("Armijo needs 0 < c < 1, 0 < shrink < 1, max_backtracks ≥ 1".into()));
        }
        if let Some(mu) = self.metric_mass {
            if !(mu > 0.0) {
                return Err(Error::InvalidParameter(format!("metric_mass must be positive, got {mu}")));
            }
        }
        Ok(())
    }
}

/// A converged (or best-effort) state and its certificates.
#[derive(Debug)]
pub struct GroundState<G> {
    pub u: Field<G>,
    pub breakdown: EnergyBreakdown,
    /// H¹-dual norm of `I_ε'(u)`.
    pub residual_grad: f64,
    /// `|J_ε(u)|`.
    pub residual_j: f64,
    /// `|P_ε(u)|`.
    pub residual_p: f64,
    pub iterations: usize,
    pub epsilon: f64,
    pub converged: bool,
    pub fibering: FiberingResult,
    pub min_u: f64,
}

impl<G> GroundState<G> {
    /// `|P_ε| / Σ|terms of P_ε|`.
    pub fn pohozaev_relative(&self) -> f64 {
        self.residual_p / self.breakdown.p_scale
    }
}

/// Grid-specific steps of the iteration.
pub trait SolverGrid: ConvolutionGrid + Dictionary {
    /// Translation normalization applied after projection when enabled.
    fn normalize_position(&self, u: Vec<f64>) -> Vec<f64> {
        u
    }
}

impl SolverGrid for RadialGrid {}

impl SolverGrid for BoxGrid {
    fn normalize_position(&self, u: Vec<f64>) -> Vec<f64> {
        self.recenter(&u)
    }
}

/// Moves a box field so that its `|u|`-maximum sits at the box centre.
pub fn recenter(u: &BoxField) -> BoxField {
    Field::new(u.grid().clone(), u.grid().recenter(u.values())).expect("shifted samples are finite")
}

fn zero_pinned<G: Grid>(grid: &G, mut u: Vec<f64>) -> Vec<f64> {
    for &i in grid.pinned() {
        u[i] = 0.0;
    }
    u
}

/// `s > 0` near 1 with `J_ε(s u) = 0`, from `J_ε(su) = s²α + s⁴β - s^pγ`.
fn amplitude_root(b: &EnergyBreakdown, pp: &ProblemParams) -> Option<f64> {
    let s = &b.integrals;
    let (p, eps, q2, a) = (pp.p, pp.epsilon, pp.kernel.q.powi(2), pp.kernel.a);
    let alpha = 1.5 * s.grad_sq + 0.5 * eps * s.l2_sq;
    let beta = 0.75 * q2 * (s.v - s.x / (3.0 * a));
    let gamma = (2.0 * p - 3.0) / p * s.lp;
    // h(s) = α + s²β - s^{p-2}γ
    let h = |x: f64| alpha + x * x * beta - x.powf(p - 2.0) * gamma;
    let dh = |x: f64| 2.0 * x * beta - (p - 2.0) * x.powf(p - 3.0) * gamma;
    let mut x = 1.0;
    for _ in 0..60 {
        let step = h(x) / dh(x);
        if !step.is_finite() {
            return None;
        }
        let next = (x - step).clamp(0.5 * x, 2.0 * x);
        if (next - x).abs() <= 4.0 * f64::EPSILON * x {
            return Some(next);
        }
        x = next;
    }
    (h(x).abs() <= 1e-14 * (alpha + x * x * beta.abs() + x.powf(p - 2.0) * gamma)).then_some(x)
}

/// Dilates `u` to its fibering maximizer and fixes its amplitude onto `J_ε = 0`.
fn project<G: SolverGrid>(u: &Field<G>, pp: &ProblemParams, recenter: bool) -> Result<OnManifold<G>> {
    let grid = u.grid().clone();
    let fib = fibering_maximize(u, pp)?;
    let mut values = if (fib.t_star - 1.0).abs() > 1e-12 {
        zero_pinned(&*grid, grid.dilate(u.values(), fib.t_star))
    } else {
        u.values().to_vec()
    };
    if recenter {
        values = grid.normalize_position(values);
    }
    let v = Field::new(grid.clone(), values)?;
    retract(v.clone(), pp)?
        .ok_or_else(|| Error::Domain("no amplitude puts the initial state on J = 0".into()))
}

/// H¹-dual norm `(dᵀ S⁻¹ d)^{1/2}` of a node derivative.
pub fn dual_norm<G: Grid>(grid: &G, d: &[f64]) -> Result<f64> {
    let free = zero_pinned(grid, d.to_vec());
    let g = grid.sobolev_solve(&free)?;
    Ok(free.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
}

fn finish<G: SolverGrid>(
    state: OnManifold<G>,
    pp: &ProblemParams,
    iterations: usize,
    residual_grad: f64,
    cfg: &SolverConfig,
) -> Result<GroundState<G>> {
    let fibering = fibering_maximize(&state.u, pp)?;
    let b = state.breakdown;
    let converged = residual_grad <= cfg.grad_tol && b.j_eps.abs() <= cfg.j_tol;
    let min_u = state.u.values().iter().fold(f64::INFINITY, |m, &v| m.min(v));
    Ok(GroundState {
        u: state.u,
        breakdown: b,
        residual_grad,
        residual_j: b.j_eps.abs(),
        residual_p: b.p_eps.abs(),
        iterations,
        epsilon: pp.epsilon,
        converged,
        fibering,
        min_u,
    })
}

/// Progress of one outer iteration, for logging.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub residual_grad: f64,
    pub step: f64,
}

/// Minimizes `I_ε` over the Nehari–Pohozaev set starting from `init`.
pub fn solve_fixed_eps<G: SolverGrid>(
    init: &Field<G>,
    pp: &ProblemParams,
    cfg: &SolverConfig,
) -> Result<GroundState<G>> {
    solve_fixed_eps_with(init, pp, cfg, |_| {})
}

/// [`solve_fixed_eps`] with a callback after every outer iteration.
pub fn solve_fixed_eps_with<G: SolverGrid>(
    init: &Field<G>,
    pp: &ProblemParams,
    cfg: &SolverConfig,
    mut on_iter: impl FnMut(&IterationRecord),
) -> Result<GroundState<G>> {
    cfg.validate()?;
    if !(pp.epsilon > 0.0) {
        return Err(Error::InvalidParameter("fixed-ε solves need ε > 0".into()));
    }
    if init.values().iter().all(|&v| v == 0.0) {
        return Err(Error::Domain("initial state is identically zero".into()));
    }
    let grid = init.grid().clone();
    let StepRule::BacktrackingArmijo { c, shrink, max_backtracks } = cfg.step_rule;
    let mu = cfg.metric_mass.unwrap_or(pp.epsilon.max(1e-3));
    let start = Field::new(grid.clone(), zero_pinned(&*grid, init.values().to_vec()))?;
    let mut cur = project(&start, pp, cfg.recenter)?;
    let mut tau = cfg.initial_step;
    let mut iter = 0;
    loop {
        let d = zero_pinned(&*grid, node_derivative(&cur.u, pp));
        let residual_grad = dual_norm(&*grid, &d)?;
        on_iter(&IterationRecord { iteration: iter, energy: cur.breakdown.i_eps, residual_grad, step: tau });
        let done = residual_grad <= cfg.grad_tol && cur.breakdown.j_eps.abs() <= cfg.j_tol;
        if done || iter >= cfg.max_outer_iters {
            return finish(cur, pp, iter, residual_grad, cfg);
        }
        iter += 1;

        // Riesz gradient, with its component normal to {J_ε = 0} removed
        let n = zero_pinned(&*grid, pohozaev_node_derivative(&cur.u, pp));
        let gd = grid.sobolev_solve_with_mass(&d, mu)?;
        let gn = grid.sobolev_solve_with_mass(&n, mu)?;
        let nn: f64 = n.iter().zip(&gn).map(|(a, b)| a * b).sum();
        let nd: f64 = n.iter().zip(&gd).map(|(a, b)| a * b).sum();
        let lambda = if nn > 0.0 { nd / nn } else { 0.0 };
        let g: Vec<f64> = gd.iter().zip(&gn).map(|(a, b)| a - lambda * b).collect();
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();

        let e0 = cur.breakdown.i_eps;
        let b = &cur.breakdown;
        // energy differences below this are rounding; there the step is
        // judged by the slope at the trial point instead
        let noise = 1e3 * f64::EPSILON * (b.dirichlet + b.mass + b.bp + b.lp);
        let mut accepted = None;
        for _ in 0..max_backtracks {
            let trial: Vec<f64> = cur.u.values().iter().zip(&g).map(|(u, g)| u - tau * g).collect();
            if let Some(next) = retract(Field::new(grid.clone(), trial)?, pp)? {
                let e = next.breakdown.i_eps;
                let ok = e <= e0 - c * tau * slope
                    || (e <= e0 + noise && {
                        let dn = node_derivative(&next.u, pp);
                        let along: f64 = dn.iter().zip(&g).map(|(a, b)| a * b).sum();
                        along.abs() <= (1.0 - 2.0 * c) * slope
                    });
                if ok {
                    accepted = Some(next);
                    break;
                }
            }
            tau *= shrink;
        }
        let Some(mut next) = accepted else {
            // no descent left at working precision
            return finish(cur, pp, iter, residual_grad, cfg);
        };
        if cfg.recenter && iter % 25 == 0 {
            let moved = grid.normalize_position(next.u.values().to_vec());
            if moved.as_slice() != next.u.values() {
                next = retract(Field::new(grid.clone(), moved)?, pp)?.unwrap_or(next);
            }
        }
        cur = next;
        tau = (tau * 2.0).min(1e3 * cfg.initial_step);
    }
}

struct OnManifold<G> {
    u: Field<G>,
    breakdown: EnergyBreakdown,
}

/// Rescales the amplitude of `v` onto `J_ε = 0`; `None` if no root near 1 exists.
fn retract<G: SolverGrid>(v: Field<G>, pp: &ProblemParams) -> Result<Option<OnManifold<G>>> {
    let b = evaluate(&v, pp)?;
    let Some(s) = amplitude_root(&b, pp) else { return Ok(None) };
    if !(0.5..=2.0).contains(&s) {
        return Ok(None);
    }
    let u = v.scaled(s);
    let breakdown = evaluate(&u, pp)?;
    Ok(Some(OnManifold { u, breakdown }))
}

/// Radial Gaussian `e^{-r²}` (or its box counterpart) as the default start.
pub fn gaussian_init_radial(grid: &Arc<RadialGrid>) -> Field<RadialGrid> {
    Field::from_radial(grid.clone(), |r| (-r * r).exp()).expect("finite")
}

pub fn gaussian_init_box(grid: &Arc<BoxGrid>) -> Field<BoxGrid> {
    Field::from_fn(grid.clone(), |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()).expect("finite")
}

/// One row of the continuation trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub epsilon: f64,
    pub m_eps: f64,
    pub grad_res: f64,
    pub j_res: f64,
    pub p_res: f64,
    pub lp_norm: f64,
    pub e_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Weak residual of the zero-mass system at this state.
    pub zero_mass_residual: f64,
    /// Kept out of serialized output so reruns are byte-identical.
    #[serde(skip_serializing, default)]
    pub wall_ms: f64,
}

/// Continuation record and the checks made along it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContinuationTrace {
    pub entries: Vec<TraceEntry>,
    /// Messages for every failed bound (`m_ε ≤ m_1`, `m_ε > 0`, `‖u_ε‖_p` floor).
    pub violations: Vec<String>,
    /// Failure of a fixed-`ε` solve that truncated the trace.
    pub failure: Option<String>,
}

impl ContinuationTrace {
    /// Columns `epsilon,m_eps,grad_res,J_res,P_res,Lp_norm,E_norm`; wall time
    /// is kept out so that reruns are byte-identical.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,m_eps,grad_res,J_res,P_res,Lp_norm,E_norm\n");
        for e in &self.entries {
            s.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                e.epsilon, e.m_eps, e.grad_res, e.j_res, e.p_res, e.lp_norm, e.e_norm
            ));
        }
        s
    }

    /// Recomputes the bound checks over all entries.
    pub fn check_bounds(&mut self) {
        self.violations.clear();
        let Some(first) = self.entries.first() else { return };
        let m1 = first.m_eps;
        for e in &self.entries {
            if e.m_eps > m1 + 1e-8 {
                self.violations.push(format!("m_eps = {:e} at eps = {:e} exceeds m_1 = {m1:e}", e.m_eps, e.epsilon));
            }
            if !(e.m_eps > 0.0) {
                self.violations.push(format!("m_eps = {:e} at eps = {:e} is not positive", e.m_eps, e.epsilon));
            }
        }
        let median = self.lp_median();
        for e in &self.entries {
            if e.lp_norm < 0.5 * median {
                self.violations.push(format!(
                    "‖u‖_p = {:e} at eps = {:e} is below half the run median {median:e}",
                    e.lp_norm, e.epsilon
                ));
            }
        }
    }

    pub fn lp_median(&self) -> f64 {
        let mut v: Vec<f64> = self.entries.iter().map(|e| e.lp_norm).collect();
        if v.is_empty() {
            return 0.0;
        }
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

/// Halving schedule `1, 1/2, …, 2^{-k}`.
pub fn halving_schedule(k: u32) -> Vec<f64> {
    (0..=k).map(|i| 0.5f64.powi(i as i32)).collect()
}

pub fn validate_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("continuation schedule is empty".into()));
    }
    if schedule.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidParameter("schedule entries must be positive".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("schedule must be strictly decreasing".into()));
    }
    Ok(())
}

/// Result of a continuation run.
pub struct Continuation<G> {
    pub trace: ContinuationTrace,
    /// Ground state at the smallest `ε` reached.
    pub last: Option<GroundState<G>>,
    /// `I(u)` at `ε = 0` for the last state.
    pub zero_mass_energy: Option<f64>,
    /// Weak residual of the zero-mass system for the last state.
    pub zero_mass_residual: Option<f64>,
    /// H¹-dual norm of `I'(u)` at `ε = 0` for the last state, the supremum
    /// over all test fields rather than the dictionary.
    pub zero_mass_dual_norm: Option<f64>,
}

/// Solves along `schedule`, warm-starting each `ε` from the previous state.
/// `resume` supplies entries and the state after them from an earlier run;
/// `on_entry` sees each completed state, e.g. to write a checkpoint.
pub fn continue_to_zero_mass<G: SolverGrid>(
    init: &Field<G>,
    pp0: &ProblemParams,
    schedule: &[f64],
    cfg: &SolverConfig,
    resume: Option<(Vec<TraceEntry>, Field<G>)>,
    mut on_entry: impl FnMut(&ContinuationTrace, &GroundState<G>),
) -> Result<Continuation<G>> {
    validate_schedule(schedule)?;
    let mut trace = ContinuationTrace::default();
    let mut start = init.clone();
    if let Some((entries, state)) = resume {
        if entries.len() > schedule.len()
            || entries.iter().zip(schedule).any(|(e, s)| e.epsilon.to_bits() != s.to_bits())
        {
            return Err(Error::InvalidParameter("checkpoint does not match the schedule".into()));
        }
        trace.entries = entries;
        start = state;
    }
    let mut last = None;
    if let Some(e) = trace.entries.last().filter(|_| trace.entries.len() == schedule.len()) {
        // nothing left to solve; rebuild the final state from the checkpoint
        let pp = pp0.with_epsilon(e.epsilon)?;
        let grid = start.grid().clone();
        let state = OnManifold { breakdown: evaluate(&start, &pp)?, u: start.clone() };
        let d = zero_pinned(&*grid, node_derivative(&start, &pp));
        last = Some(finish(state, &pp, e.iterations, dual_norm(&*grid, &d)?, cfg)?);
    }
    for &eps in &schedule[trace.entries.len()..] {
        let pp = pp0.with_epsilon(eps)?;
        let clock = Instant::now();
        let gs = match solve_fixed_eps(&start, &pp, cfg) {
            Ok(gs) => gs,
            Err(e) => {
                trace.failure = Some(format!("solve at eps = {eps:e} failed: {e}"));
                break;
            }
        };
        let entry = TraceEntry {
            epsilon: eps,
            m_eps: gs.breakdown.i_eps,
            grad_res: gs.residual_grad,
            j_res: gs.residual_j,
            p_res: gs.residual_p,
            lp_norm: lp_norm(&gs.u, pp.p)?,
            e_norm: e_norm(&gs.u, &pp.kernel),
            iterations: gs.iterations,
            converged: gs.converged,
            zero_mass_residual: weak_residual(&gs.u, &pp0.with_epsilon(0.0)?)?,
            wall_ms: clock.elapsed().as_secs_f64() * 1e3,
        };
        trace.entries.push(entry);
        trace.check_bounds();
        on_entry(&trace, &gs);
        start = gs.u.clone();
        last = Some(gs);
    }
    trace.check_bounds();
    let (zero_mass_energy, zero_mass_residual, zero_mass_dual_norm) = match &last {
        Some(gs) => {
            let pp = pp0.with_epsilon(0.0)?;
            let d = node_derivative(&gs.u, &pp);
            (
                Some(evaluate(&gs.u, &pp)?.i),
                Some(weak_residual(&gs.u, &pp)?),
                Some(dual_norm(&**gs.u.grid(), &d)?),
            )
        }
        None => (None, None, None),
    };
    Ok(Continuation {
        trace,
        last,
        zero_mass_energy,
        zero_mass_residual,
        zero_mass_dual_norm,
    })
}

/// Fixed test fields for the weak residual: every nodal basis bump, plus a
/// few low-order modes.
pub trait Dictionary: ConvolutionGrid {
    /// `‖e_i‖_{H¹}` for the unit bump at each node; pinned nodes get `∞`.
    fn bump_norms(&self) -> Vec<f64>;

    /// Low-order modes, vanishing on the pinned nodes.
    fn modes(&self) -> Vec<Vec<f64>>;
}

/// Number of radial modes `sin(kπr/R)/(kπr/R)` in the dictionary.
pub const RADIAL_MODES: usize = 16;

/// Box modes are `Π sin(m_k π(x_k+L)/2L)` with `1 ≤ m_k ≤ BOX_MODES`.
pub const BOX_MODES: usize = 3;

impl Dictionary for RadialGrid {
    fn bump_norms(&self) -> Vec<f64> {
        let a = self.dirichlet_matrix();
        let mut out: Vec<f64> = (0..self.len()).map(|i| (a.get(i, i) + self.weights()[i]).sqrt()).collect();
        for &i in self.pinned() {
            out[i] = f64::INFINITY;
        }
        out
    }

    fn modes(&self) -> Vec<Vec<f64>> {
        let r = self.nodes();
        let big_r = self.r_max();
        (1..=RADIAL_MODES)
            .map(|k| {
                let kk = k as f64 * PI / big_r;
                zero_pinned(self, r.iter().map(|&x| (kk * x).sin() / (kk * x)).collect())
            })
            .collect()
    }
}

impl Dictionary for BoxGrid {
    fn bump_norms(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.len()];
        e[0] = 1.0;
        let norm = (self.dirichlet_form(&e) + self.weights()[0]).sqrt();
        vec![norm; self.len()]
    }

    fn modes(&self) -> Vec<Vec<f64>> {
        let l = self.half_width();
        let mut out = Vec::new();
        for mx in 1..=BOX_MODES {
            for my in 1..=BOX_MODES {
                for mz in 1..=BOX_MODES {
                    let m = [mx, my, mz];
                    out.push(
                        (0..self.len())
                            .map(|i| {
                                let x = self.point(i);
                                (0..3).map(|k| (m[k] as f64 * PI * (x[k] + l) / (2.0 * l)).sin()).product()
                            })
                            .collect(),
                    );
                }
            }
        }
        out
    }
}

/// `max_k |I_ε'(u)[v_k]| / ‖v_k‖_{H¹}` over the grid's dictionary.
pub fn weak_residual<G: Dictionary>(u: &Field<G>, pp: &ProblemParams) -> Result<f64> {
    let grid = u.grid();
    let d = node_derivative(u, pp);
    let mut worst = d
        .iter()
        .zip(grid.bump_norms())
        .map(|(d, n)| d.abs() / n)
        .fold(0.0_f64, f64::max);
    for v in grid.modes() {
        let num: f64 = d.iter().zip(&v).map(|(a, b)| a * b).sum();
        let h1 = grid.dirichlet_form(&v) + grid.weights().iter().zip(&v).map(|(w, x)| w * x * x).sum::<f64>();
        if h1 > 0.0 {
            worst = worst.max(num.abs() / h1.sqrt());
        }
    }
    Ok(worst)
}
