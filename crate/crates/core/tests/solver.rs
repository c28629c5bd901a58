use std::sync::Arc;

use bopo_core::functionals::*;
use bopo_core::grid::*;
use bopo_core::kernel::KernelParams;
use bopo_core::solver::*;

fn pp(eps: f64) -> ProblemParams {
    ProblemParams::new(KernelParams::new(1.0, 1.0).unwrap(), 4.0, eps).unwrap()
}

fn radial(n: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::stretched(n, 40.0, 4.0).unwrap())
}

#[test]
fn fixed_eps_solve_converges_with_certificates() {
    let g = radial(2048);
    let pp = pp(1.0);
    let mut energies = Vec::new();
    let gs = solve_fixed_eps_with(&gaussian_init_radial(&g), &pp, &SolverConfig::default(), |r| {
        energies.push(r.energy)
    })
    .unwrap();
    assert!(gs.converged, "{gs:?}");
    assert!(gs.residual_grad <= 1e-6);
    assert!(gs.residual_j <= 1e-8 * gs.breakdown.j_scale.max(1.0));
    assert!(gs.pohozaev_relative() <= 1e-4);
    assert_eq!(gs.fibering.sign_changes, 1);
    assert!((gs.fibering.t_star - 1.0).abs() < 1e-6);
    assert!(gs.min_u > -1e-8 * gs.u.values()[0]);
    assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
    // the state is on the manifold: re-evaluating reproduces the certificate
    let b = evaluate(&gs.u, &pp).unwrap();
    assert_eq!(b.i_eps.to_bits(), gs.breakdown.i_eps.to_bits());
    assert!(weak_residual(&gs.u, &pp).unwrap() < 1e-5);
}

#[test]
fn solves_are_bit_identical() {
    let g = radial(256);
    let pp = pp(0.5);
    let cfg = SolverConfig { max_outer_iters: 40, ..Default::default() };
    let a = solve_fixed_eps(&gaussian_init_radial(&g), &pp, &cfg).unwrap();
    let b = solve_fixed_eps(&gaussian_init_radial(&g), &pp, &cfg).unwrap();
    assert_eq!(a.iterations, b.iterations);
    assert!(a.u.values().iter().zip(b.u.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(a.breakdown.i_eps.to_bits(), b.breakdown.i_eps.to_bits());
}

#[test]
fn config_and_schedule_validation() {
    assert!(SolverConfig::default().validate().is_ok());
    assert!(SolverConfig { max_outer_iters: 0, ..Default::default() }.validate().is_err());
    assert!(SolverConfig { grad_tol: -1.0, ..Default::default() }.validate().is_err());
    assert!(SolverConfig { metric_mass: Some(0.0), ..Default::default() }.validate().is_err());
    let bad = StepRule::BacktrackingArmijo { c: 1.5, shrink: 0.5, max_backtracks: 10 };
    assert!(SolverConfig { step_rule: bad, ..Default::default() }.validate().is_err());
    assert!(validate_schedule(&[1.0, 0.5, 0.5]).is_err());
    assert!(validate_schedule(&[1.0, 0.0]).is_err());
    assert!(validate_schedule(&halving_schedule(10)).is_ok());
    let g = radial(256);
    assert!(solve_fixed_eps(&gaussian_init_radial(&g), &pp(0.0), &SolverConfig::default()).is_err());
}

#[test]
fn continuation_respects_bounds_and_resumes() {
    let g = radial(2048);
    let schedule = halving_schedule(3);
    let cfg = SolverConfig::default();
    let init = gaussian_init_radial(&g);
    let mut seen = Vec::new();
    let full = continue_to_zero_mass(&init, &pp(1.0), &schedule, &cfg, None, |t, gs| {
        seen.push((t.entries.clone(), gs.u.clone()))
    })
    .unwrap();
    let trace = &full.trace;
    assert_eq!(trace.entries.len(), 4);
    assert!(trace.violations.is_empty(), "{:?}", trace.violations);
    assert!(trace.failure.is_none());
    assert!(trace.entries.iter().all(|e| e.converged));
    assert!(trace.entries.windows(2).all(|w| w[1].m_eps < w[0].m_eps));
    assert!(full.zero_mass_energy.unwrap() > 0.0);
    assert!(full.zero_mass_energy.unwrap() < trace.entries[3].m_eps);
    assert!(trace.to_csv().starts_with("epsilon,m_eps,grad_res,J_res,P_res,Lp_norm,E_norm\n"));
    assert_eq!(trace.to_csv().lines().count(), 5);

    let (entries, state) = seen[1].clone();
    let resumed = continue_to_zero_mass(&init, &pp(1.0), &schedule, &cfg, Some((entries, state)), |_, _| {}).unwrap();
    let strip = |t: &ContinuationTrace| {
        t.entries.iter().map(|e| TraceEntry { wall_ms: 0.0, ..*e }).collect::<Vec<_>>()
    };
    assert_eq!(strip(&resumed.trace), strip(trace));
    let (a, b) = (resumed.last.unwrap(), full.last.unwrap());
    assert!(a.u.values().iter().zip(b.u.values()).all(|(x, y)| x.to_bits() == y.to_bits()));

    let (entries, state) = seen[3].clone();
    let done = continue_to_zero_mass(&init, &pp(1.0), &schedule, &cfg, Some((entries, state)), |_, _| {}).unwrap();
    assert_eq!(strip(&done.trace), strip(trace));
    assert_eq!(done.zero_mass_energy.unwrap().to_bits(), full.zero_mass_energy.unwrap().to_bits());
    assert_eq!(done.zero_mass_dual_norm.unwrap().to_bits(), full.zero_mass_dual_norm.unwrap().to_bits());
    let c = done.last.unwrap();
    assert_eq!(c.residual_grad.to_bits(), b.residual_grad.to_bits());
    assert_eq!(c.iterations, b.iterations);

    let wrong = vec![TraceEntry { epsilon: 0.3, ..trace.entries[0] }];
    assert!(continue_to_zero_mass(&init, &pp(1.0), &schedule, &cfg, Some((wrong, init.clone())), |_, _| {}).is_err());
}

#[test]
fn bound_checks_flag_bad_traces() {
    let e = TraceEntry {
        epsilon: 1.0,
        m_eps: 2.0,
        grad_res: 0.0,
        j_res: 0.0,
        p_res: 0.0,
        lp_norm: 1.0,
        e_norm: 1.0,
        iterations: 1,
        converged: true,
        zero_mass_residual: 0.0,
        wall_ms: 0.0,
    };
    let mut t = ContinuationTrace {
        entries: vec![e, TraceEntry { epsilon: 0.5, m_eps: 3.0, ..e }, TraceEntry { epsilon: 0.25, lp_norm: 0.1, ..e }],
        ..Default::default()
    };
    t.check_bounds();
    assert_eq!(t.violations.len(), 2, "{:?}", t.violations);
    assert_eq!(t.lp_median(), 1.0);
}

#[test]
fn box_solver_descends_onto_the_manifold() {
    let g = Arc::new(BoxGrid::new(16, 4.0).unwrap());
    let pp = pp(1.0);
    let cfg = SolverConfig { max_outer_iters: 15, mode: Mode::Box, recenter: true, ..Default::default() };
    let mut energies = Vec::new();
    let gs = solve_fixed_eps_with(&gaussian_init_box(&g), &pp, &cfg, |r| energies.push(r.energy)).unwrap();
    assert!(energies.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{energies:?}");
    assert!(gs.residual_j <= 1e-8 * gs.breakdown.j_scale);
    assert!(gs.breakdown.i_eps > 0.0);
}

#[test]
fn recentering_is_a_lattice_translation() {
    let g = Arc::new(BoxGrid::new(16, 4.0).unwrap());
    let h = g.spacing();
    let u = Field::from_fn(g.clone(), |x| {
        (-((x[0] - 3.0 * h).powi(2) + (x[1] + 2.0 * h).powi(2) + x[2] * x[2])).exp()
    })
    .unwrap();
    let v = recenter(&u);
    let max = |f: &BoxField| {
        f.values().iter().enumerate().fold((0, 0.0), |m, (i, &x)| if x > m.1 { (i, x) } else { m }).0
    };
    assert_eq!(g.point(max(&v)), [0.0, 0.0, 0.0]);
    let (eu, ev) = (evaluate(&u, &pp(1.0)).unwrap(), evaluate(&v, &pp(1.0)).unwrap());
    assert!((eu.i_eps - ev.i_eps).abs() <= 1e-6 * eu.i_eps.abs());
}

#[test]
fn dual_norm_dominates_the_weak_residual() {
    let g = radial(512);
    let pp = pp(1.0);
    let u = Field::from_radial(g.clone(), |r| 1.3 * (-0.7 * r * r).exp()).unwrap();
    let d = node_derivative(&u, &pp);
    let dual = dual_norm(&*g, &d).unwrap();
    let weak = weak_residual(&u, &pp).unwrap();
    assert!(weak > 0.0);
    assert!(weak <= dual * (1.0 + 1e-8), "{weak} > {dual}");
}
