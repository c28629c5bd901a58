//! Property suites behind `bopo verify`. Each check returns a
//! [`CheckReport`] whose failure messages carry what is needed to replay it.

use std::sync::Arc;

use anyhow::{bail, Result};
use bopo_core::bp_energy::{
    cached_oracle, check_cauchy_schwarz, check_l3_inequality, check_positivity, lower_bound_family,
    lower_bound_ratio, random_radial_mixture, v_fast, v_oracle, CheckReport,
};
use bopo_core::functionals::{
    check_scalar_inequalities, evaluate, first_variation, ProblemParams,
};
use bopo_core::grid::{BoxField, BoxGrid, Field, Grid, RadialField, RadialGrid};
use bopo_core::kernel::{
    eval_grad_k_radial, eval_grad_lap_k_radial, eval_k, eval_lap_k, identity_defect, verify_cy_convolution,
    KernelParams,
};
use bopo_core::potential::{energy_identity_gap, pde_residual, solve_potential_box, solve_potential_radial};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const SUITES: &[&str] = &["kernel", "energy", "inequalities", "functionals"];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

/// Runs one named suite; `all` is handled by the caller.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    let checks = match name {
        "kernel" => kernel_checks()?,
        "energy" => {
            let mut c = fundamental_solution_checks(64)?;
            c.extend(energy_identity_checks(seed)?);
            c
        }
        "inequalities" => {
            let mut c = bilinear_form_checks(seed)?;
            c.push(lower_bound_check()?);
            c.push(l3_check()?);
            c.push(scalar_inequality_check());
            c
        }
        "functionals" => functional_checks(seed)?,
        other => bail!("unknown suite `{other}`; expected one of {} or all", SUITES.join(", ")),
    };
    Ok(SuiteReport { suite: name.into(), seed, passed: checks.iter().all(|c| c.passed), checks })
}

fn log_space(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (l, h) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (l + (h - l) * i as f64 / (n - 1) as f64).exp())
}

fn finish(mut rep: CheckReport, worst: f64) -> CheckReport {
    rep.metrics.insert("worst_error".into(), worst);
    rep
}

// ---------------------------------------------------------------------------
// kernel

const KERNEL_LENGTHS: [f64; 3] = [0.25, 1.0, 4.0];

pub fn kernel_checks() -> Result<Vec<CheckReport>> {
    Ok(vec![kernel_identity_check(), convolution_check()?, kernel_derivative_check()?])
}

/// `|K - (C - Y)| / K ≤ 1e-13` on 2000 log-spaced `r ∈ [1e-6, 1e3]·a`.
pub fn kernel_identity_check() -> CheckReport {
    let mut rep = CheckReport::new("kernel_identity", 0, 0, None, None);
    let mut worst = 0.0_f64;
    for &a in &KERNEL_LENGTHS {
        let p = KernelParams { a, q: 1.0 };
        for r in log_space(1e-6 * a, 1e3 * a, 2000) {
            let d = identity_defect(r, &p);
            worst = worst.max(d);
            rep.trials += 1;
            rep.record(1e-13 - d, 0.0, || format!("a = {a:e}, r = {r:e}: defect {d:e}"));
        }
    }
    finish(rep, worst)
}

/// `(C∗Y)(R) = 4πa² K(R)` to 1e-8 at 20 radii.
pub fn convolution_check() -> Result<CheckReport> {
    let mut rep = CheckReport::new("convolution_identity", 0, 0, None, None);
    let mut worst = 0.0_f64;
    for &a in &KERNEL_LENGTHS {
        let p = KernelParams { a, q: 1.0 };
        for r in log_space(1e-3 * a, 1e2 * a, 20) {
            let e = verify_cy_convolution(&p, &[r])?;
            worst = worst.max(e);
            rep.trials += 1;
            rep.record(1e-8 - e, 0.0, || format!("a = {a:e}, R = {r:e}: relative gap {e:e}"));
        }
    }
    Ok(finish(rep, worst))
}

/// Fourth-order central differences of `K`, `∂_r K` and `ΔK`.
pub fn kernel_derivative_check() -> Result<CheckReport> {
    let mut rep = CheckReport::new("kernel_derivatives", 0, 0, None, None);
    let mut worst = 0.0_f64;
    let d1 = |f: &dyn Fn(f64) -> f64, r: f64, h: f64| {
        (f(r - 2.0 * h) - 8.0 * f(r - h) + 8.0 * f(r + h) - f(r + 2.0 * h)) / (12.0 * h)
    };
    let d2 = |f: &dyn Fn(f64) -> f64, r: f64, h: f64| {
        (-f(r - 2.0 * h) + 16.0 * f(r - h) - 30.0 * f(r) + 16.0 * f(r + h) - f(r + 2.0 * h)) / (12.0 * h * h)
    };
    for &a in &KERNEL_LENGTHS {
        let p = KernelParams { a, q: 1.0 };
        let k = |r: f64| eval_k(r, &p);
        let dk = |r: f64| eval_grad_k_radial(r, &p).expect("r > 0");
        let lk = |r: f64| eval_lap_k(r, &p).expect("r > 0");
        for r in log_space(1e-2 * a, 30.0 * a, 60) {
            let h = 1e-3 * r;
            let g = dk(r);
            let fd_g = d1(&k, r, h);
            let kk = d2(&k, r, h);
            let lap = lk(r);
            let fd_lap = kk + 2.0 * g / r;
            let gl = eval_grad_lap_k_radial(r, &p)?;
            let fd_gl = d1(&lk, r, h);
            let errs = [
                ("∂K", (g - fd_g).abs() / g.abs()),
                ("ΔK", (lap - fd_lap).abs() / (kk.abs() + (2.0 * g / r).abs())),
                ("∂ΔK", (gl - fd_gl).abs() / gl.abs()),
            ];
            for (what, e) in errs {
                worst = worst.max(e);
                rep.trials += 1;
                rep.record(1e-6 - e, 0.0, || format!("a = {a:e}, r = {r:e}: {what} off by {e:e}"));
            }
        }
    }
    Ok(finish(rep, worst))
}

// ---------------------------------------------------------------------------
// energy

/// Box half-width for the fundamental-solution check.
pub const BOX_HALF_WIDTH: f64 = 8.0;

/// `‖-Δφ + a²Δ²φ - 4πu²‖₂ / ‖4πu²‖₂` for Gaussian sources on an `n³` box,
/// and the box potential against the radial one at every box node.
pub fn fundamental_solution_checks(n: usize) -> Result<Vec<CheckReport>> {
    let grid = Arc::new(BoxGrid::new(n, BOX_HALF_WIDTH)?);
    let radial = Arc::new(RadialGrid::stretched(4096, 60.0, 3.0)?);
    let mut res = CheckReport::new("fundamental_solution", 0, 0, Some(grid.spec()), None);
    let mut cross = CheckReport::new("radial_vs_box", 0, 0, Some(grid.spec()), None);
    let (mut worst_res, mut worst_cross) = (0.0_f64, 0.0_f64);
    let sources: [(f64, [f64; 3]); 3] = [(1.0, [0.0; 3]), (0.8, [0.0; 3]), (1.4, [0.5, -0.25, 0.3])];
    for &a in &[0.5, 1.0] {
        let p = KernelParams { a, q: 1.0 };
        res.params = Some(p);
        for &(s, c) in &sources {
            let rho = BoxField::from_fn(grid.clone(), |x| {
                let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2);
                (-d2 / (s * s)).exp()
            })?;
            let phi = solve_potential_box(&rho, &p)?;
            let r = pde_residual(&phi, &rho)?.relative;
            worst_res = worst_res.max(r);
            res.trials += 1;
            res.record(1e-8 - r, 0.0, || format!("a = {a}, width {s}, center {c:?}: residual {r:e}"));
            if c != [0.0; 3] {
                continue;
            }
            let rr = RadialField::from_radial(radial.clone(), |r| (-r * r / (s * s)).exp())?;
            let rphi = solve_potential_radial(&rr, &p)?;
            let interp = radial.interpolant(rphi.field().values());
            let mut worst = 0.0_f64;
            for (i, v) in phi.field().values().iter().enumerate() {
                let x = grid.point(i);
                let want = interp.eval(radial.xi_of((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()));
                worst = worst.max(((v - want) / want).abs());
            }
            worst_cross = worst_cross.max(worst);
            cross.trials += 1;
            cross.record(1e-5 - worst, 0.0, || format!("a = {a}, width {s}: max relative gap {worst:e}"));
        }
    }
    Ok(vec![finish(res, worst_res), finish(cross, worst_cross)])
}

/// Radial grid shared by the oracle-based checks.
pub fn oracle_grid() -> Result<Arc<RadialGrid>> {
    Ok(Arc::new(RadialGrid::stretched(1024, 20.0, 3.0)?))
}

/// `‖φ‖_𝒜² = 4π∫φu²` on ten random smooth sources, and `V(u²,u²)` by the
/// potential route against the brute-force double sum.
pub fn energy_identity_checks(seed: u64) -> Result<Vec<CheckReport>> {
    let p = KernelParams { a: 1.0, q: 1.0 };
    let solve_grid = Arc::new(RadialGrid::stretched(2048, 40.0, 4.0)?);
    let ograd = oracle_grid()?;
    let mut gap = CheckReport::new("energy_identity", 10, seed, Some(solve_grid.spec()), Some(p));
    let mut agree = CheckReport::new("potential_vs_oracle", 10, seed, Some(ograd.spec()), Some(p));
    let (mut worst_gap, mut worst_agree) = (0.0_f64, 0.0_f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..10 {
        let u = random_radial_mixture(&solve_grid, &mut rng, true);
        let rho = u.square();
        let g = energy_identity_gap(&solve_potential_radial(&rho, &p)?, &rho)?;
        worst_gap = worst_gap.max(g);
        gap.record(1e-6 - g, 0.0, || format!("trial {trial} (seed {seed}): gap {g:e}"));

        let u = random_radial_mixture(&ograd, &mut rng, true);
        let rho = u.square();
        let fast = v_fast(&rho, &rho, &p)?.value;
        let slow = v_oracle(&rho, &rho, &p)?.value;
        let e = (fast - slow).abs() / slow.abs();
        worst_agree = worst_agree.max(e);
        agree.record(1e-6 - e, 0.0, || format!("trial {trial} (seed {seed}): V {fast:e} vs oracle {slow:e}"));
    }
    Ok(vec![finish(gap, worst_gap), finish(agree, worst_agree)])
}

// ---------------------------------------------------------------------------
// inequalities

/// Symmetry, Cauchy–Schwarz and positivity on 100 random sign-indefinite pairs.
pub fn bilinear_form_checks(seed: u64) -> Result<Vec<CheckReport>> {
    let oracle = cached_oracle(&oracle_grid()?, &KernelParams { a: 1.0, q: 1.0 })?;
    Ok(vec![check_cauchy_schwarz(&oracle, 100, seed)?, check_positivity(&oracle, 100, seed)?])
}

/// Grid for the lower-bound family, wide enough for the `r ≈ 100` cutoffs.
pub fn family_grid(n: usize) -> Result<Arc<RadialGrid>> {
    Ok(Arc::new(RadialGrid::stretched(n, 400.0, 8.0)?))
}

/// Minimum of `V(f,f)/(∫W₁f)²` over the family on one grid, with the
/// member that attains it.
pub fn family_min_ratio(n: usize) -> Result<(f64, String)> {
    let grid = family_grid(n)?;
    let p = KernelParams { a: 1.0, q: 1.0 };
    let mut best = (f64::INFINITY, String::new());
    for m in lower_bound_family() {
        let f = RadialField::from_radial(grid.clone(), &m.profile)?;
        let r = lower_bound_ratio(&f, 1.0, &p)?.ratio;
        if r < best.0 {
            best = (r, m.name);
        }
    }
    Ok(best)
}

/// Positive family minimum, stable within 5% when the grid is doubled.
pub fn lower_bound_check() -> Result<CheckReport> {
    let p = KernelParams { a: 1.0, q: 1.0 };
    let mut rep = CheckReport::new("lower_bound_ratio", 30, 0, Some(family_grid(2048)?.spec()), Some(p));
    let (coarse, who) = family_min_ratio(2048)?;
    let (fine, who_fine) = family_min_ratio(4096)?;
    let drift = (fine / coarse - 1.0).abs();
    rep.record(coarse, f64::MIN_POSITIVE, || format!("minimum {coarse:e} at {who} is not positive"));
    rep.record(0.05 - drift, 0.0, || {
        format!("minimum moved by {drift:e} under refinement ({coarse:e} at {who} → {fine:e} at {who_fine})")
    });
    rep.metrics.insert("min_ratio".into(), coarse);
    rep.metrics.insert("min_ratio_refined".into(), fine);
    rep.metrics.insert("refinement_drift".into(), drift);
    Ok(rep)
}

pub const L3_DILATIONS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// `(1/π)‖φ_u‖_𝒜‖∇u‖₂ ≥ ‖u‖₃³` over the family and its rescalings
/// `t²u(t·)`, with slack floor `-1e-8·scale`.
pub fn l3_check() -> Result<CheckReport> {
    let grid = Arc::new(RadialGrid::stretched(2048, 1000.0, 8.0)?);
    let p = KernelParams { a: 1.0, q: 1.0 };
    let mut rep = CheckReport::new("l3_inequality", 0, 0, Some(grid.spec()), Some(p));
    let mut worst_rel = f64::INFINITY;
    for m in lower_bound_family() {
        for &t in &L3_DILATIONS {
            let u = RadialField::from_radial(grid.clone(), |r| t * t * (m.profile)(t * r))?;
            let s = check_l3_inequality(&u, &p)?;
            let rel = s.slack / s.scale;
            worst_rel = worst_rel.min(rel);
            rep.trials += 1;
            rep.record(rel, -1e-8, || format!("{} at t = {t}: slack {:e} of scale {:e}", m.name, s.slack, s.scale));
        }
    }
    rep.metrics.insert("worst_relative_slack".into(), worst_rel);
    Ok(rep)
}

/// The two scalar inequalities on a 200 × 200 `(t, b)` grid.
pub fn scalar_inequality_check() -> CheckReport {
    let s = check_scalar_inequalities(200, 200);
    let mut rep = CheckReport::new("scalar_inequalities", s.points, 0, None, None);
    rep.record(s.worst_dilation_slack, -1e-14, || {
        format!("dilation inequality slack {:e} at (t, b) = {:?}", s.worst_dilation_slack, s.worst_dilation_at)
    });
    rep.record(s.worst_kernel_slack, -1e-14, || {
        format!("kernel inequality slack {:e} at b = {:e}", s.worst_kernel_slack, s.worst_kernel_at)
    });
    rep
}

// ---------------------------------------------------------------------------
// functionals

/// Random smooth radial profile `Σ Aᵢ e^{-((r-cᵢ)/σᵢ)²}` (symmetrized) in
/// closed form, so rescalings can be sampled exactly.
#[derive(Debug, Clone)]
pub struct Profile(Vec<(f64, f64, f64)>);

impl Profile {
    pub fn random(rng: &mut impl Rng) -> Self {
        Profile(
            (0..rng.gen_range(1..=3))
                .map(|_| (rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0), rng.gen_range(0.4..1.5)))
                .collect(),
        )
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.0
            .iter()
            .map(|&(a, c, s)| a * ((-((r - c) / s).powi(2)).exp() + (-((r + c) / s).powi(2)).exp()))
            .sum()
    }

    /// `t² u(t r)` on `grid`.
    pub fn dilated(&self, grid: &Arc<RadialGrid>, t: f64) -> Result<RadialField> {
        Ok(RadialField::from_radial(grid.clone(), |r| t * t * self.eval(t * r))?)
    }
}

pub fn functional_checks(seed: u64) -> Result<Vec<CheckReport>> {
    let grid = Arc::new(RadialGrid::stretched(2048, 40.0, 4.0)?);
    let kernel = KernelParams { a: 1.0, q: 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jrep = CheckReport::new("fibering_derivative_is_j", 10, seed, Some(grid.spec()), Some(kernel));
    let mut grep = CheckReport::new("gradient_vs_finite_difference", 10, seed, Some(grid.spec()), Some(kernel));
    let mut rrep = CheckReport::new("recombination", 10, seed, Some(grid.spec()), Some(kernel));
    let (mut wj, mut wg, mut wr) = (0.0_f64, 0.0_f64, 0.0_f64);
    for trial in 0..10 {
        let p = rng.gen_range(3.2..5.8);
        let eps = rng.gen_range(0.05..2.0);
        let pp = ProblemParams::new(kernel, p, eps)?;
        let prof = Profile::random(&mut rng);
        let u = prof.dilated(&grid, 1.0)?;
        let b = evaluate(&u, &pp)?;

        // d/dt I_ε(t²u(t·)) at t = 1, fourth order
        let h = 1e-2;
        let ie = |t: f64| -> Result<f64> { Ok(evaluate(&prof.dilated(&grid, t)?, &pp)?.i_eps) };
        let di = (ie(1.0 - 2.0 * h)? - 8.0 * ie(1.0 - h)? + 8.0 * ie(1.0 + h)? - ie(1.0 + 2.0 * h)?) / (12.0 * h);
        let e = (di - b.j_eps).abs() / b.j_scale;
        wj = wj.max(e);
        jrep.record(1e-6 - e, 0.0, || {
            format!("trial {trial} (seed {seed}, p = {p}, eps = {eps}, profile {prof:?}): dI/dt {di:e} vs J {:e}", b.j_eps)
        });

        let v = random_radial_mixture(&grid, &mut rng, true);
        let along = |s: f64| -> Result<f64> {
            let w = Field::new(grid.clone(), u.values().iter().zip(v.values()).map(|(a, b)| a + s * b).collect())?;
            Ok(evaluate(&w, &pp)?.i_eps)
        };
        let h = 1e-3;
        let fd = (along(-2.0 * h)? - 8.0 * along(-h)? + 8.0 * along(h)? - along(2.0 * h)?) / (12.0 * h);
        let an = first_variation(&u, &v, &pp)?;
        let e = (fd - an).abs() / an.abs().max(fd.abs());
        wg = wg.max(e);
        grep.record(1e-5 - e, 0.0, || format!("trial {trial} (seed {seed}): I'(u)v = {an:e}, difference quotient {fd:e}"));

        let lhs = b.i_eps - b.j_eps / (2.0 * p - 3.0);
        let rhs = b.recombined(&pp);
        let e = (lhs - rhs).abs() / (b.i_eps.abs() + (b.j_eps / (2.0 * p - 3.0)).abs());
        wr = wr.max(e);
        rrep.record(1e-10 - e, 0.0, || format!("trial {trial} (seed {seed}): {lhs:e} vs {rhs:e}"));
    }
    Ok(vec![finish(jrep, wj), finish(grep, wg), finish(rrep, wr)])
}

