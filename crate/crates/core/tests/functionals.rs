use std::sync::Arc;

use bopo_core::functionals::*;
use bopo_core::grid::*;
use bopo_core::kernel::KernelParams;
use proptest::prelude::*;

fn grid() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::stretched(2048, 40.0, 4.0).unwrap())
}

/// `Σ A e^{-((r-c)/σ)²}` symmetrized about the origin, sampled at `t²u(t r)`.
fn state(g: &Arc<RadialGrid>, terms: &[(f64, f64, f64)], t: f64) -> RadialField {
    RadialField::from_radial(g.clone(), |r| {
        let r = t * r;
        t * t * terms
            .iter()
            .map(|&(a, c, s)| a * ((-((r - c) / s).powi(2)).exp() + (-((r + c) / s).powi(2)).exp()))
            .sum::<f64>()
    })
    .unwrap()
}

fn terms() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.3f64..2.0, 0.0f64..2.0, 0.4f64..1.5), 1..=3)
}

fn problem(p: f64, eps: f64, a: f64, q: f64) -> ProblemParams {
    ProblemParams::new(KernelParams::new(a, q).unwrap(), p, eps).unwrap()
}

fn fourth_order(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn recombination_identity(ts in terms(), p in 3.05f64..5.95, eps in 0.0f64..2.0, a in 0.3f64..3.0, q in 0.2f64..2.0) {
        let g = grid();
        let pp = problem(p, eps, a, q);
        let b = evaluate(&state(&g, &ts, 1.0), &pp).unwrap();
        let lhs = b.i_eps - b.j_eps / (2.0 * p - 3.0);
        let rhs = b.recombined(&pp);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (b.i_eps.abs() + b.j_eps.abs()));
        // every term on the right is nonnegative, the J kernel term included
        prop_assert!(rhs > 0.0);
        prop_assert!(b.integrals.v - b.integrals.x / (3.0 * a) >= 0.0);
    }

    #[test]
    fn j_is_the_fibering_derivative(ts in terms(), p in 3.2f64..5.8, eps in 0.05f64..2.0) {
        let g = grid();
        let pp = problem(p, eps, 1.0, 1.0);
        let u = state(&g, &ts, 1.0);
        let b = evaluate(&u, &pp).unwrap();
        let di = fourth_order(|t| evaluate(&state(&g, &ts, t), &pp).unwrap().i_eps, 1.0, 1e-2);
        prop_assert!((di - b.j_eps).abs() <= 1e-6 * b.j_scale, "{} vs {}", di, b.j_eps);
        let map = FiberingMap::new(&u, &pp).unwrap();
        prop_assert!((map.derivative(1.0) - b.j_eps).abs() <= 1e-9 * b.j_scale);
        prop_assert!((map.value(1.0) - b.i_eps).abs() <= 1e-12 * b.i_eps.abs().max(1.0));
    }

    #[test]
    fn gradients_match_difference_quotients(ts in terms(), vs in terms(), p in 3.2f64..5.8, eps in 0.05f64..2.0) {
        let g = grid();
        let pp = problem(p, eps, 0.8, 1.2);
        let u = state(&g, &ts, 1.0);
        let v = state(&g, &vs, 1.0);
        let along = |s: f64| {
            Field::new(g.clone(), u.values().iter().zip(v.values()).map(|(a, b)| a + s * b).collect()).unwrap()
        };
        let fd_i = fourth_order(|s| evaluate(&along(s), &pp).unwrap().i_eps, 0.0, 1e-3);
        let an_i = first_variation(&u, &v, &pp).unwrap();
        prop_assert!((fd_i - an_i).abs() <= 1e-5 * fd_i.abs().max(an_i.abs()));
        let fd_j = fourth_order(|s| evaluate(&along(s), &pp).unwrap().j_eps, 0.0, 1e-3);
        let an_j: f64 = pohozaev_node_derivative(&u, &pp).iter().zip(v.values()).map(|(a, b)| a * b).sum();
        prop_assert!((fd_j - an_j).abs() <= 1e-5 * fd_j.abs().max(an_j.abs()));
    }

    #[test]
    fn fibering_maximizer_is_unique_and_stationary(ts in terms(), p in 3.2f64..5.8, eps in 0.05f64..2.0) {
        let g = grid();
        let pp = problem(p, eps, 1.0, 1.0);
        let u = state(&g, &ts, 1.0);
        let f = fibering_maximize(&u, &pp).unwrap();
        prop_assert_eq!(f.sign_changes, 1);
        prop_assert!(f.second_derivative < 0.0);
        let map = FiberingMap::new(&u, &pp).unwrap();
        for t in [0.5 * f.t_star, 0.9 * f.t_star, 1.1 * f.t_star, 2.0 * f.t_star] {
            prop_assert!(map.value(t) <= f.value);
        }
    }

    #[test]
    fn scalar_inequalities(t in 1e-3f64..1e3, b in 0.0f64..50.0) {
        prop_assert!(dilation_inequality_lhs(t, b) >= -1e-14);
        prop_assert!(kernel_inequality_lhs(b) >= -1e-14);
    }
}

#[test]
fn scalar_inequalities_on_the_full_grid() {
    let rep = check_scalar_inequalities(200, 200);
    assert!(rep.passed, "{rep:?}");
    assert_eq!(rep.points, 40_000);
}

#[test]
fn sobolev_gradient_represents_the_derivative() {
    let g = grid();
    let pp = problem(4.0, 1.0, 1.0, 1.0);
    let u = state(&g, &[(1.0, 0.0, 1.0)], 1.0);
    let v = state(&g, &[(0.5, 1.0, 0.7)], 1.0);
    let grad = gradient(&u, &pp, Metric::Sobolev).unwrap();
    // ⟨grad, v⟩_{H¹} = I'(u)[v] on the free nodes
    let h1: f64 = g.dirichlet_apply(grad.values()).iter().zip(v.values()).map(|(a, b)| a * b).sum::<f64>()
        + g.weights().iter().zip(grad.values().iter().zip(v.values())).map(|(w, (a, b))| w * a * b).sum::<f64>();
    let want = first_variation(&u, &v, &pp).unwrap();
    assert!((h1 / want - 1.0).abs() < 1e-8, "{h1} vs {want}");
}

#[test]
fn exponent_and_mass_guards() {
    let k = KernelParams::new(1.0, 1.0).unwrap();
    assert!(ProblemParams::new(k, 3.0, 1.0).is_err());
    assert!(ProblemParams::new(k, 6.0, 1.0).is_err());
    assert!(ProblemParams::new(k, 4.0, -1.0).is_err());
    let g = grid();
    let pp = problem(4.0, 0.0, 1.0, 1.0);
    assert!(fibering_maximize(&state(&g, &[(1.0, 0.0, 1.0)], 1.0), &pp).is_err());
    let pp = problem(4.0, 1.0, 1.0, 1.0);
    assert!(fibering_maximize(&Field::zeros(g), &pp).is_err());
}
