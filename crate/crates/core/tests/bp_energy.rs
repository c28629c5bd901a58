use std::sync::Arc;

use bopo_core::bp_energy::*;
use bopo_core::grid::*;
use bopo_core::kernel::KernelParams;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params(a: f64) -> KernelParams {
    KernelParams::new(a, 1.0).unwrap()
}

fn small_grid() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::stretched(384, 16.0, 2.0).unwrap())
}

fn solve_grid() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::stretched(2048, 40.0, 4.0).unwrap())
}

#[test]
fn gaussian_self_energy_matches_fourier_quadrature() {
    // ∫ |ρ̂|² 4π/(k²(1+a²k²)) d³k/(2π)³ for ρ = e^{-r²}, 30-digit quadrature
    let g = solve_grid();
    let rho = RadialField::from_radial(g, |r| (-r * r).exp()).unwrap();
    for (a, want) in [(1.0, 16.221137782260469908), (0.5, 20.848868641750906485)] {
        let v = self_energy(&rho, a);
        assert!((v / want - 1.0).abs() < 1e-9, "a = {a}: {v}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bilinear_and_exactly_symmetric(seed in any::<u64>(), s in -2.0f64..2.0) {
        let g = small_grid();
        let p = params(1.0);
        let o = cached_oracle(&g, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_radial_mixture(&g, &mut rng, true);
        let h = random_radial_mixture(&g, &mut rng, true);
        let k = random_radial_mixture(&g, &mut rng, true);
        let vfh = o.energy(&f, &h).unwrap().value;
        prop_assert_eq!(vfh.to_bits(), o.energy(&h, &f).unwrap().value.to_bits());
        let comb = Field::new(g.clone(), f.values().iter().zip(k.values()).map(|(a, b)| a + s * b).collect()).unwrap();
        let lhs = o.energy(&comb, &h).unwrap().value;
        let rhs = vfh + s * o.energy(&k, &h).unwrap().value;
        let scale = o.energy(&f, &f).unwrap().value.abs().max(o.energy(&h, &h).unwrap().value.abs());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn fast_route_matches_oracle(seed in any::<u64>()) {
        let g = small_grid();
        let p = params(0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_radial_mixture(&g, &mut rng, true);
        let h = random_radial_mixture(&g, &mut rng, true);
        let fast = v_fast(&f, &h, &p).unwrap().value;
        let slow = v_oracle(&f, &h, &p).unwrap().value;
        let scale = (v_fast(&f, &f, &p).unwrap().value * v_fast(&h, &h, &p).unwrap().value).sqrt();
        prop_assert!((fast - slow).abs() <= 1e-6 * scale);
    }

    #[test]
    fn e_norm_is_composed_from_tested_parts(seed in any::<u64>()) {
        let g = solve_grid();
        let p = params(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_radial_mixture(&g, &mut rng, true);
        let want = dirichlet_seminorm(&u).powi(2) + self_energy(&u.square(), 1.0).sqrt();
        prop_assert!((e_norm(&u, &p).powi(2) / want - 1.0).abs() < 1e-13);
    }
}

#[test]
fn sweeps_pass() {
    let g = small_grid();
    let o = cached_oracle(&g, &params(1.0)).unwrap();
    for rep in [
        check_cauchy_schwarz(&o, 30, 11).unwrap(),
        check_positivity(&o, 30, 12).unwrap(),
        check_exponential_layer(&o, 5, 13).unwrap(),
        check_triangle_inequality(&g, &params(1.0), 30, 14),
    ] {
        assert!(rep.passed, "{}: {:?}", rep.check, rep.failures);
    }
}

#[test]
fn coulomb_oracle_is_the_small_a_limit() {
    // π³√(2/π): the difference of two independent N(0, I/2) vectors is N(0, I)
    let want = std::f64::consts::PI.powi(3) * (2.0 / std::f64::consts::PI).sqrt();
    let err = |n| {
        let g = Arc::new(RadialGrid::stretched(n, 16.0, 2.0).unwrap());
        let rho = RadialField::from_radial(g.clone(), |r| (-r * r).exp()).unwrap();
        (RadialOracle::coulomb(g).energy(&rho, &rho).unwrap().value / want - 1.0).abs()
    };
    // the diagonal kink of 1/max(r,s) is not corrected: second order
    let (e1, e2) = (err(384), err(768));
    assert!(e1 < 1e-4 && e1 / e2 > 3.5, "{e1:e} → {e2:e}");

    let g = small_grid();
    let rho = RadialField::from_radial(g.clone(), |r| (-r * r).exp()).unwrap();
    let mut prev = 0.0;
    for a in [1.0, 0.3, 0.1, 0.01] {
        let v = self_energy(&rho, a);
        assert!(v > prev && v < want);
        prev = v;
    }
}

#[test]
fn lower_bound_ratio_guards() {
    let g = solve_grid();
    let zero = Field::zeros(g.clone());
    let r = lower_bound_ratio(&zero, 1.0, &params(1.0)).unwrap();
    assert!(r.zero_input && r.ratio.is_infinite());
    let neg = RadialField::from_radial(g.clone(), |r| (1.0 - r) * (-r * r).exp()).unwrap();
    assert!(lower_bound_ratio(&neg, 1.0, &params(1.0)).is_err());
    let pos = RadialField::from_radial(g, |r| (-r * r).exp()).unwrap();
    assert!(lower_bound_ratio(&pos, 0.5, &params(1.0)).is_err());
}

#[test]
fn lower_bound_ratio_is_bounded_below_under_scaling() {
    let g = Arc::new(RadialGrid::stretched(2048, 400.0, 8.0).unwrap());
    let p = params(1.0);
    let mut ratios = Vec::new();
    for k in -3..=3 {
        let lambda = 2f64.powi(k);
        let f = RadialField::from_radial(g.clone(), |r| (-(lambda * r).powi(2)).exp()).unwrap();
        ratios.push(lower_bound_ratio(&f, 1.0, &p).unwrap().ratio);
    }
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min > 1e-3, "{ratios:?}");
}

#[test]
fn lower_bound_family_is_positive() {
    let g = Arc::new(RadialGrid::stretched(2048, 400.0, 8.0).unwrap());
    let p = params(1.0);
    let fam = lower_bound_family();
    assert_eq!(fam.len(), 30);
    for m in fam {
        let f = RadialField::from_radial(g.clone(), &m.profile).unwrap();
        let r = lower_bound_ratio(&f, 1.0, &p).unwrap();
        assert!(r.ratio > 0.0 && r.ratio.is_finite(), "{}", m.name);
    }
}

#[test]
fn l3_inequality_holds_for_spread_gaussians() {
    let g = solve_grid();
    let p = params(1.0);
    for w in [0.25, 1.0, 4.0] {
        let u = RadialField::from_radial(g.clone(), |r| (-(r / w).powi(2)).exp()).unwrap();
        let s = check_l3_inequality(&u, &p).unwrap();
        assert!(s.slack > 0.0, "w = {w}: {s:?}");
    }
}

#[test]
fn l3_inequality_fails_for_concentrated_states() {
    // Relative slack of e^{-r²/s²} at s = 1/64, a = 1 from Fourier quadrature:
    // ‖φ‖_𝒜 grows like the L² mass while ‖u‖₃³ outgrows ‖∇u‖₂.
    let g = Arc::new(RadialGrid::stretched(2048, 40.0, 8.0).unwrap());
    let s = 1.0 / 64.0;
    let u = RadialField::from_radial(g, |r| (-(r / s).powi(2)).exp()).unwrap();
    let l3 = check_l3_inequality(&u, &params(1.0)).unwrap();
    assert!((l3.slack / l3.scale - -0.3730353595057326).abs() < 1e-3, "{l3:?}");
}

#[test]
fn weighted_embeddings_are_finite() {
    let g = solve_grid();
    let w = WeightParams::new(1.0, 1.0).unwrap();
    for s in [0.5, 2.0, 6.0] {
        let u = RadialField::from_radial(g.clone(), |r| (-(r / s).powi(2)).exp()).unwrap();
        let e = check_weighted_embeddings(&u, &w, &params(1.0));
        assert!(e.w_ratio > 0.0 && e.w_ratio.is_finite());
        assert!(e.z_ratio > 0.0 && e.z_ratio.is_finite());
    }
}

#[test]
fn box_oracle_tracks_the_spectral_route() {
    let p = KernelParams::new(1.0, 1.0).unwrap();
    let mut gaps = Vec::new();
    for n in [8, 12, 16, 24] {
        let g = Arc::new(BoxGrid::new(n, 4.0).unwrap());
        let f = BoxField::from_fn(g.clone(), |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()).unwrap();
        let fast = v_fast(&f, &f, &p).unwrap().value;
        let slow = v_oracle(&f, &f, &p).unwrap().value;
        gaps.push((slow / fast - 1.0).abs());
    }
    assert!(gaps.windows(2).all(|w| w[1] < 0.5 * w[0]), "{gaps:?}");
    assert!(gaps[3] < 3e-4, "{gaps:?}");
}
