use std::sync::Arc;

use bopo_core::grid::*;
use bopo_core::kernel::KernelParams;
use bopo_core::potential::*;
use proptest::prelude::*;

fn grid() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::stretched(2048, 40.0, 4.0).unwrap())
}

fn params(a: f64) -> KernelParams {
    KernelParams::new(a, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn potential_is_monotone_in_the_source(
        c in 0.0f64..3.0, w in 0.4f64..2.0, cut in 0.3f64..4.0, a in 0.2f64..3.0
    ) {
        let g = grid();
        let p = params(a);
        let big = RadialField::from_radial(g.clone(), |r| (-((r - c) / w).powi(2)).exp()).unwrap();
        // pointwise smaller: multiply by a factor in [0, 1]
        let small = RadialField::from_radial(g.clone(), |r| {
            (-((r - c) / w).powi(2)).exp() / (1.0 + (r / cut).powi(2))
        })
        .unwrap();
        let pb = solve_potential_radial(&big, &p).unwrap();
        let ps = solve_potential_radial(&small, &p).unwrap();
        for (s, b) in ps.field().values().iter().zip(pb.field().values()) {
            prop_assert!(s <= b);
        }
    }

    #[test]
    fn sup_norm_bound(w in 0.2f64..3.0, a in 0.1f64..5.0) {
        let g = grid();
        let rho = RadialField::from_radial(g.clone(), |r| (-(r / w).powi(2)).exp()).unwrap();
        let phi = solve_potential_radial(&rho, &params(a)).unwrap();
        let max = phi.field().values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max <= rho.integral() / a);
    }

    #[test]
    fn energy_identity(w in 0.3f64..3.0, a in 0.2f64..3.0) {
        let g = grid();
        let rho = RadialField::from_radial(g.clone(), |r| (-(r / w).powi(2)).exp()).unwrap();
        let phi = solve_potential_radial(&rho, &params(a)).unwrap();
        prop_assert!(energy_identity_gap(&phi, &rho).unwrap() <= 1e-6);
        prop_assert!(pde_residual(&phi, &rho).unwrap().relative <= 1e-5);
    }
}

#[test]
fn coulomb_far_field() {
    let g = grid();
    let rho = RadialField::from_radial(g.clone(), |r| (-r * r).exp()).unwrap();
    let phi = solve_potential_radial(&rho, &params(1.0)).unwrap();
    let r = 0.8 * g.r_max();
    let rphi = r * g.sample(phi.field().values(), r);
    assert!((rphi / rho.integral() - 1.0).abs() < 0.01, "{rphi}");
}

#[test]
fn gaussian_potential_matches_closed_form() {
    // φ = K * ρ for ρ = e^{-r²}: Coulomb part π^{3/2} erf(r)/r, Yukawa part by
    // the standard erfc formula.
    let g = grid();
    let a: f64 = 0.7;
    let rho = RadialField::from_radial(g.clone(), |r| (-r * r).exp()).unwrap();
    let phi = solve_potential_radial(&rho, &params(a)).unwrap();
    let erf = |x: f64| 1.0 - erfc(x);
    for r in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let coulomb = std::f64::consts::PI.powf(1.5) * erf(r) / r;
        let k = 1.0 / a;
        let yuk = std::f64::consts::PI.powf(1.5) / (2.0 * r)
            * (k * k / 4.0).exp()
            * ((-k * r).exp() * erfc(k / 2.0 - r) - (k * r).exp() * erfc(k / 2.0 + r));
        let want = coulomb - yuk;
        let got = g.sample(phi.field().values(), r);
        assert!((got / want - 1.0).abs() < 1e-6, "r = {r}: {got} vs {want}");
    }
}

/// Complementary error function (W. J. Cody's rational approximations are
/// overkill here; a continued fraction plus series is accurate to ~1e-13).
fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.5 {
        // erf series
        let mut sum = x;
        let mut term = x;
        let mut n = 0.0;
        while term.abs() > 1e-17 * sum.abs() {
            n += 1.0;
            term *= -x * x / n;
            sum += term / (2.0 * n + 1.0);
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        // Lentz continued fraction
        let mut f = 0.0;
        for k in (1..=60).rev() {
            f = (k as f64 / 2.0) / (x + f);
        }
        (-x * x).exp() / std::f64::consts::PI.sqrt() / (x + f)
    }
}

#[test]
fn box_and_radial_solvers_agree() {
    let a = 1.0;
    let bg = Arc::new(BoxGrid::new(48, 7.0).unwrap());
    let rho = BoxField::from_fn(bg.clone(), |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()).unwrap();
    let phi = solve_potential_box(&rho, &params(a)).unwrap();
    let g = grid();
    let rr = RadialField::from_radial(g.clone(), |r| (-r * r).exp()).unwrap();
    let rphi = solve_potential_radial(&rr, &params(a)).unwrap();
    let interp = g.interpolant(rphi.field().values());
    let mut worst = 0.0f64;
    for (i, v) in phi.field().values().iter().enumerate() {
        let x = bg.point(i);
        let want = interp.eval(g.xi_of((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()));
        worst = worst.max((v / want - 1.0).abs());
    }
    assert!(worst < 1e-5, "{worst:e}");
    assert!((phi.a_norm_sq() / rphi.a_norm_sq() - 1.0).abs() < 1e-5);
}

#[test]
fn sources_must_be_nonnegative_and_fit_the_box() {
    let g = grid();
    let neg = RadialField::from_radial(g, |r| (1.0 - r) * (-r * r).exp()).unwrap();
    assert!(solve_potential_radial(&neg, &params(1.0)).is_err());
    let bg = Arc::new(BoxGrid::new(16, 2.0).unwrap());
    let wide = BoxField::from_fn(bg, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 4.0).exp()).unwrap();
    assert!(box_boundary_mass(&wide) > BOX_BOUNDARY_MASS);
    assert!(solve_potential_box(&wide, &params(1.0)).is_err());
}

#[test]
fn potential_hash_is_stable() {
    let g = grid();
    let rho = RadialField::from_radial(g, |r| (-r * r).exp()).unwrap();
    let phi = solve_potential_radial(&rho, &params(1.0)).unwrap();
    let rec = PotentialRecord::new(&phi, &rho).unwrap();
    assert_eq!(rec.source_hash, hash_samples(rho.values()));
    assert_eq!(rec.source_hash.len(), 64);
}
